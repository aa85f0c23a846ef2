import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdeeg import synth
from pdeeg.bdf import (
    DIGITAL_MAX,
    DIGITAL_MIN,
    Recording,
    Subject,
    is_auxiliary_label,
    parse_header,
    quantization_step,
    read_bdf,
    read_samples,
    write_bdf,
)
from pdeeg.errors import (
    BadMagic,
    GainDegenerate,
    InvalidRecording,
    NonNumericField,
    OutOfRangeSample,
    TruncatedBody,
    TruncatedHeader,
)

FULL_RANGE = (float(DIGITAL_MIN), float(DIGITAL_MAX))  # gain exactly 1


def one_channel(samples, rate=64.0, subject=None):
    return Recording(
        rate_hz=rate,
        labels=("Cz",),
        data=np.asarray(samples, dtype=float)[np.newaxis, :],
        subject=subject or Subject(id="S1", group="HC"),
    )


class TestParseHeader:
    def test_roundtrip_single_channel(self):
        rec = one_channel(np.zeros(64))
        header = parse_header(write_bdf(rec))
        assert header.num_channels == 1
        assert header.channels[0].label == "Cz"
        assert header.num_records == 1
        assert header.record_duration_s == 1.0

    def test_wrong_magic_byte(self):
        data = bytearray(write_bdf(one_channel(np.zeros(64))))
        data[0] = 0x00
        with pytest.raises(BadMagic):
            parse_header(bytes(data))

    def test_dataset_conformant_fixture(self):
        # 40 channels at 512 Hz, 1 s of data
        rec = Recording(
            rate_hz=512.0,
            labels=tuple(f"ch{i}" for i in range(40)),
            data=np.zeros((40, 512)),
            subject=Subject(id="S1", group="PD"),
        )
        header = parse_header(write_bdf(rec))
        assert header.num_channels == 40
        assert header.header_bytes == 256 * 41
        ch = header.channels[0]
        assert ch.samples_per_record / header.record_duration_s == 512

    def test_header_too_short(self):
        with pytest.raises(TruncatedHeader):
            parse_header(b"\xffBIOSEMI" + b" " * 100)

    def test_channel_block_truncated(self):
        data = write_bdf(one_channel(np.zeros(64)))
        with pytest.raises(TruncatedHeader):
            parse_header(data[:400])

    def test_non_numeric_record_count(self):
        data = bytearray(write_bdf(one_channel(np.zeros(64))))
        data[236:244] = b"notanum "
        with pytest.raises(NonNumericField):
            parse_header(bytes(data))

    def test_degenerate_digital_range(self):
        data = bytearray(write_bdf(one_channel(np.zeros(64))))
        # channel 0 digital min/max fields
        dig_min_off = 256 + 16 + 80 + 8 + 8 + 8
        data[dig_min_off : dig_min_off + 8] = b"0       "
        data[dig_min_off + 8 : dig_min_off + 16] = b"0       "
        with pytest.raises(GainDegenerate):
            parse_header(bytes(data))


class TestReadSamples:
    def test_unit_gain_triplets(self):
        # gain 1, offset 0: digital value == physical value
        rec = one_channel([1.0, -1.0, 0.0, 5.0] * 16)
        data = write_bdf(rec, FULL_RANGE)
        header = parse_header(data)
        body = data[header.header_bytes :]
        assert body[0:3] == b"\x01\x00\x00"  # +1 little-endian 24-bit
        assert body[3:6] == b"\xff\xff\xff"  # -1 two's complement
        back = read_samples(data, header)
        np.testing.assert_array_equal(back.data, rec.data)

    def test_roundtrip_quantization_bound(self, rng):
        samples = rng.uniform(-400, 400, 1000)
        samples = np.concatenate([samples, np.zeros(24)])  # 1024 = 16 s at 64 Hz
        rec = one_channel(samples)
        quant = (-500.0, 500.0)
        back = read_bdf(write_bdf(rec, quant))
        assert np.abs(back.data - rec.data).max() <= quantization_step(quant)

    def test_monotone_scaling(self):
        rec = one_channel(np.linspace(-90, 90, 64))
        back = read_bdf(write_bdf(rec, (-100.0, 100.0)))
        assert np.all(np.diff(back.data[0]) > 0)

    def test_trailing_bytes_rejected(self):
        data = write_bdf(one_channel(np.zeros(64)))
        with pytest.raises(TruncatedBody):
            read_bdf(data + b"\x00\x00\x00")

    def test_truncated_body_rejected(self):
        data = write_bdf(one_channel(np.zeros(64)))
        with pytest.raises(TruncatedBody):
            read_bdf(data[:-3])

    def test_unknown_record_count_resolved(self):
        data = bytearray(write_bdf(one_channel(np.zeros(128), rate=64.0)))
        data[236:244] = b"-1      "
        back = read_bdf(bytes(data))
        assert back.n_samples == 128

    def test_unknown_record_count_mismatch(self):
        data = bytearray(write_bdf(one_channel(np.zeros(128), rate=64.0)))
        data[236:244] = b"-1      "
        with pytest.raises(TruncatedBody):
            read_bdf(bytes(data[:-3]))


class TestWriteBdf:
    def test_no_channels(self):
        rec = one_channel(np.zeros(64))
        rec.labels = ()
        rec.data = np.zeros((0, 64))
        with pytest.raises(InvalidRecording):
            write_bdf(rec)

    def test_exact_size_one_second(self):
        rec = one_channel(np.zeros(512), rate=512.0)
        data = write_bdf(rec)
        assert len(data) == 512 + 3 * 512  # 2*256 header + 24-bit samples

    def test_out_of_range_sample(self):
        rec = one_channel(np.full(64, 600.0))
        with pytest.raises(OutOfRangeSample):
            write_bdf(rec, (-500.0, 500.0))

    def test_partial_record_rejected(self):
        rec = one_channel(np.zeros(65), rate=64.0)
        with pytest.raises(InvalidRecording):
            write_bdf(rec)

    def test_subject_group_survives(self):
        rec = one_channel(np.zeros(64), subject=Subject(id="PD03", group="PD"))
        back = read_bdf(write_bdf(rec))
        assert back.subject.id == "PD03"
        assert back.subject.group == "PD"

    def test_cohort_roundtrip_groups_intact(self, tmp_path):
        spec = synth.CohortSpec(
            n_hc=3, n_pd=2, contrast_uv2=10.0, seed=4,
            duration_s=4.0, rate_hz=128.0, n_eeg_channels=3,
        )
        groups = []
        for rec in synth.iter_cohort(spec):
            back = read_bdf(write_bdf(rec, (-1000.0, 1000.0)))
            assert back.subject.group == rec.subject.group
            assert back.rate_hz == rec.rate_hz
            groups.append(back.subject.group)
        assert groups == ["HC"] * 3 + ["PD"] * 2


@settings(max_examples=40, deadline=None)
@given(
    n_channels=st.integers(1, 4),
    rate=st.sampled_from([16.0, 32.0, 64.0]),
    seconds=st.integers(1, 3),
    seed=st.integers(0, 10_000),
)
def test_roundtrip_property(n_channels, rate, seconds, seed):
    g = np.random.default_rng(seed)
    data = g.uniform(-450, 450, (n_channels, int(rate) * seconds))
    rec = Recording(
        rate_hz=rate,
        labels=tuple(f"c{i}" for i in range(n_channels)),
        data=data,
        subject=Subject(id="X", group="HC"),
    )
    quant = (-500.0, 500.0)
    back = read_bdf(write_bdf(rec, quant))
    assert back.rate_hz == rate
    assert np.abs(back.data - rec.data).max() <= quantization_step(quant)


def test_auxiliary_channel_flagging():
    assert is_auxiliary_label("EXG1")
    assert is_auxiliary_label("Status")
    assert not is_auxiliary_label("Cz")
    rec = Recording(
        rate_hz=64.0,
        labels=("Cz", "EXG1"),
        data=np.zeros((2, 64)),
    )
    assert rec.eeg_labels() == ("Cz",)
