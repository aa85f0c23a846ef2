"""BioSemi BDF (24-bit EDF-style container) reading and writing.

Layout: a 256-byte main header, then 256 bytes per channel of ASCII
fields (each field stored for all channels consecutively), then data
records of 24-bit little-endian two's-complement samples, channel-blocked
within each record.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BadMagic,
    GainDegenerate,
    InvalidRecording,
    NonNumericField,
    OutOfRangeSample,
    TruncatedBody,
    TruncatedHeader,
)

MAGIC = b"\xffBIOSEMI"
DIGITAL_MIN = -(2**23)
DIGITAL_MAX = 2**23 - 1

# Labels that mark non-EEG auxiliary channels (external electrodes,
# trigger/status lines). They are parsed like any other channel but
# excluded from default EEG channel selections.
_AUX_PREFIXES = ("EXG", "GSR", "ERG", "RESP", "TEMP", "STATUS", "TRIG", "ANA")


def is_auxiliary_label(label: str) -> bool:
    """True for EXG/status/trigger-style channels."""
    return label.strip().upper().startswith(_AUX_PREFIXES)


@dataclass(frozen=True)
class ChannelHeader:
    label: str
    transducer: str = ""
    phys_dim: str = "uV"
    phys_min: float = -500.0
    phys_max: float = 500.0
    dig_min: int = DIGITAL_MIN
    dig_max: int = DIGITAL_MAX
    prefilter: str = ""
    samples_per_record: int = 0
    reserved: str = ""

    @property
    def gain(self) -> float:
        return (self.phys_max - self.phys_min) / (self.dig_max - self.dig_min)

    @property
    def offset(self) -> float:
        return self.phys_min - self.dig_min * self.gain


@dataclass(frozen=True)
class BdfHeader:
    magic: bytes
    subject_id: str
    recording_id: str
    start: datetime.datetime
    num_records: int
    record_duration_s: float
    num_channels: int
    channels: tuple[ChannelHeader, ...]
    version: str = "24BIT"

    @property
    def header_bytes(self) -> int:
        return 256 * (self.num_channels + 1)

    @property
    def samples_per_record_total(self) -> int:
        return sum(c.samples_per_record for c in self.channels)

    @property
    def record_bytes(self) -> int:
        return 3 * self.samples_per_record_total


@dataclass(frozen=True)
class Subject:
    id: str
    group: str = ""  # "HC", "PD", or "" when unknown
    session: str = ""


@dataclass
class Recording:
    """Multichannel time series in physical units (microvolts)."""

    rate_hz: float
    labels: tuple[str, ...]
    data: np.ndarray  # (n_channels, n_samples) float64
    subject: Subject = field(default_factory=lambda: Subject(id=""))

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
        if self.data.shape[0] != len(self.labels):
            raise InvalidRecording(
                f"{len(self.labels)} labels for {self.data.shape[0]} channels"
            )
        if self.rate_hz <= 0:
            raise InvalidRecording(f"rate_hz must be positive, got {self.rate_hz}")

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz

    def channel(self, label: str) -> np.ndarray:
        try:
            return self.data[self.labels.index(label)]
        except ValueError:
            raise KeyError(label) from None

    def eeg_labels(self) -> tuple[str, ...]:
        return tuple(l for l in self.labels if not is_auxiliary_label(l))


def _ascii(raw: bytes) -> str:
    return raw.decode("ascii", errors="replace").strip()


def _numeric(raw: bytes, kind, what: str):
    text = _ascii(raw)
    try:
        return kind(text)
    except ValueError:
        raise NonNumericField(f"{what}: {text!r} is not a valid number") from None


def parse_header(data: bytes) -> BdfHeader:
    """Parse the fixed header; consumes exactly 256*(num_channels+1) bytes."""
    if len(data) < 256:
        raise TruncatedHeader(f"need 256 bytes for the main header, got {len(data)}")
    magic = data[:8]
    if magic != MAGIC:
        raise BadMagic(f"identification bytes {magic!r} != {MAGIC!r}")
    subject_id = _ascii(data[8:88])
    recording_id = _ascii(data[88:168])
    date_txt = _ascii(data[168:176])
    time_txt = _ascii(data[176:184])
    declared_header = _numeric(data[184:192], int, "header byte count")
    version = _ascii(data[192:236])
    num_records = _numeric(data[236:244], int, "number of records")
    duration = _numeric(data[244:252], float, "record duration")
    num_channels = _numeric(data[252:256], int, "channel count")

    if num_channels < 1:
        raise NonNumericField(f"channel count must be >= 1, got {num_channels}")
    if num_records < 1 and num_records != -1:
        raise NonNumericField(f"record count must be >= 1 or -1, got {num_records}")
    if duration <= 0:
        raise NonNumericField(f"record duration must be positive, got {duration}")
    header_bytes = 256 * (num_channels + 1)
    if declared_header != header_bytes:
        raise TruncatedHeader(
            f"declared header size {declared_header} != 256*(channels+1) = {header_bytes}"
        )
    if len(data) < header_bytes:
        raise TruncatedHeader(f"need {header_bytes} header bytes, got {len(data)}")

    try:
        d, m, y = (int(p) for p in date_txt.split("."))
        hh, mm, ss = (int(p) for p in time_txt.split("."))
        year = 1900 + y if y >= 85 else 2000 + y
        start = datetime.datetime(year, m, d, hh, mm, ss)
    except ValueError:
        raise NonNumericField(
            f"start date/time {date_txt!r} {time_txt!r} not dd.mm.yy hh.mm.ss"
        ) from None

    def fields(offset: int, width: int, conv=None, what: str = ""):
        out = []
        for c in range(num_channels):
            raw = data[offset + c * width : offset + (c + 1) * width]
            out.append(_numeric(raw, conv, f"channel {c} {what}") if conv else _ascii(raw))
        return out, offset + num_channels * width

    off = 256
    labels, off = fields(off, 16)
    transducers, off = fields(off, 80)
    dims, off = fields(off, 8)
    pmins, off = fields(off, 8, float, "physical min")
    pmaxs, off = fields(off, 8, float, "physical max")
    dmins, off = fields(off, 8, int, "digital min")
    dmaxs, off = fields(off, 8, int, "digital max")
    prefilters, off = fields(off, 80)
    sprs, off = fields(off, 8, int, "samples per record")
    reserveds, off = fields(off, 32)
    assert off == header_bytes

    channels = []
    for c in range(num_channels):
        if pmaxs[c] <= pmins[c]:
            raise NonNumericField(
                f"channel {c} ({labels[c]}): physical max {pmaxs[c]} <= min {pmins[c]}"
            )
        if dmaxs[c] <= dmins[c]:
            if dmaxs[c] == dmins[c]:
                raise GainDegenerate(f"channel {c} ({labels[c]}): digital max == min")
            raise NonNumericField(
                f"channel {c} ({labels[c]}): digital max {dmaxs[c]} <= min {dmins[c]}"
            )
        if sprs[c] < 1:
            raise NonNumericField(f"channel {c} ({labels[c]}): samples/record {sprs[c]} < 1")
        channels.append(
            ChannelHeader(
                label=labels[c],
                transducer=transducers[c],
                phys_dim=dims[c],
                phys_min=pmins[c],
                phys_max=pmaxs[c],
                dig_min=dmins[c],
                dig_max=dmaxs[c],
                prefilter=prefilters[c],
                samples_per_record=sprs[c],
                reserved=reserveds[c],
            )
        )

    return BdfHeader(
        magic=magic,
        subject_id=subject_id,
        recording_id=recording_id,
        start=start,
        num_records=num_records,
        record_duration_s=duration,
        num_channels=num_channels,
        channels=tuple(channels),
        version=version,
    )


def _subject_from_header(header: BdfHeader) -> Subject:
    tokens = header.subject_id.split()
    sid = tokens[0] if tokens else ""
    group = tokens[1] if len(tokens) > 1 and tokens[1] in ("HC", "PD") else ""
    return Subject(id=sid, group=group, session=header.recording_id)


def read_samples(data: bytes, header: BdfHeader) -> Recording:
    """Decode the sample payload that follows `header` in `data`.

    The byte count must match the header geometry exactly; a -1 record
    count is resolved from the remaining length, and any mismatch is an
    error rather than a silent truncation.
    """
    body = data[header.header_bytes :]
    sprs = {c.samples_per_record for c in header.channels}
    if len(sprs) != 1:
        raise InvalidRecording(
            f"mixed samples/record {sorted(sprs)}: uniform-rate recordings only"
        )
    for c in header.channels:
        if c.dig_max == c.dig_min:
            raise GainDegenerate(f"channel {c.label}: digital max == min")

    num_records = header.num_records
    if num_records == -1:
        if len(body) == 0 or len(body) % header.record_bytes != 0:
            raise TruncatedBody(
                f"cannot resolve record count: body of {len(body)} bytes is not a "
                f"multiple of the {header.record_bytes}-byte record"
            )
        num_records = len(body) // header.record_bytes
    expected = num_records * header.record_bytes
    if len(body) != expected:
        raise TruncatedBody(
            f"body has {len(body)} bytes, header geometry requires exactly {expected}"
        )

    spr = header.channels[0].samples_per_record
    raw = np.frombuffer(body, dtype=np.uint8).reshape(
        num_records, header.num_channels, spr, 3
    )
    vals = (
        raw[..., 0].astype(np.int32)
        | (raw[..., 1].astype(np.int32) << 8)
        | (raw[..., 2].astype(np.int32) << 16)
    )
    vals -= (vals >> 23) << 24  # sign-extend 24-bit two's complement

    # (records, channels, spr) -> (channels, records*spr)
    series = vals.transpose(1, 0, 2).reshape(header.num_channels, -1).astype(np.float64)
    for i, ch in enumerate(header.channels):
        series[i] = series[i] * ch.gain + ch.offset

    rate = spr / header.record_duration_s
    return Recording(
        rate_hz=rate,
        labels=tuple(c.label for c in header.channels),
        data=series,
        subject=_subject_from_header(header),
    )


def read_bdf(source) -> Recording:
    """Read a Recording from bytes or a file path."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    return read_samples(data, parse_header(data))


def _pad(text: str, width: int) -> bytes:
    raw = text.encode("ascii", errors="replace")
    if len(raw) > width:
        raw = raw[:width]
    return raw.ljust(width)


def _fmt_phys(value: float) -> str:
    if value == int(value):
        s = str(int(value))
        if len(s) <= 8:
            return s
    for fmt in ("%g", "%.6g", "%.4g", "%.2f"):
        s = fmt % value
        if len(s) <= 8:
            return s
    raise InvalidRecording(f"physical bound {value} does not fit an 8-char field")


def write_bdf(recording: Recording, quantization: tuple[float, float] = (-500.0, 500.0)) -> bytes:
    """Serialize a Recording to BDF bytes using 1-second records.

    Samples are quantized onto the full 24-bit range mapped to
    [phys_min, phys_max]; out-of-range samples are an error. The length
    must be a whole number of 1-second records at an integer rate.
    """
    pmin, pmax = float(quantization[0]), float(quantization[1])
    if recording.data.shape[0] == 0 or len(recording.labels) == 0:
        raise InvalidRecording("recording has no channels")
    if pmax <= pmin:
        raise InvalidRecording(f"quantization range ({pmin}, {pmax}) is empty")
    rate = recording.rate_hz
    if rate != int(rate):
        raise InvalidRecording(f"rate {rate} Hz: integer rates only")
    spr = int(rate)
    n = recording.n_samples
    if n == 0 or n % spr != 0:
        raise InvalidRecording(
            f"{n} samples at {spr} Hz is not a whole number of 1 s records"
        )
    num_records = n // spr

    lo, hi = recording.data.min(initial=0.0), recording.data.max(initial=0.0)
    if lo < pmin or hi > pmax:
        raise OutOfRangeSample(
            f"samples span [{lo:.6g}, {hi:.6g}] outside [{pmin:.6g}, {pmax:.6g}]"
        )

    gain = (pmax - pmin) / (DIGITAL_MAX - DIGITAL_MIN)
    digital = np.rint((recording.data - pmin) / gain).astype(np.int64) + DIGITAL_MIN
    np.clip(digital, DIGITAL_MIN, DIGITAL_MAX, out=digital)

    subj = recording.subject
    subject_txt = " ".join(t for t in (subj.id, subj.group) if t)
    n_ch = len(recording.labels)

    head = bytearray()
    head += MAGIC
    head += _pad(subject_txt, 80)
    head += _pad(subj.session or "recording", 80)
    head += _pad("01.01.00", 8)
    head += _pad("00.00.00", 8)
    head += _pad(str(256 * (n_ch + 1)), 8)
    head += _pad("24BIT", 44)
    head += _pad(str(num_records), 8)
    head += _pad("1", 8)
    head += _pad(str(n_ch), 4)

    def block(values, width):
        for v in values:
            head.extend(_pad(v, width))

    block(recording.labels, 16)
    block(["active electrode"] * n_ch, 80)
    block(["uV"] * n_ch, 8)
    block([_fmt_phys(pmin)] * n_ch, 8)
    block([_fmt_phys(pmax)] * n_ch, 8)
    block([str(DIGITAL_MIN)] * n_ch, 8)
    block([str(DIGITAL_MAX)] * n_ch, 8)
    block([""] * n_ch, 80)
    block([str(spr)] * n_ch, 8)
    block([""] * n_ch, 32)
    assert len(head) == 256 * (n_ch + 1)

    # (channels, records, spr) -> (records, channels, spr) byte triplets
    recs = digital.reshape(n_ch, num_records, spr).transpose(1, 0, 2)
    u = (recs & 0xFFFFFF).astype(np.uint32)
    body = np.empty(u.shape + (3,), dtype=np.uint8)
    body[..., 0] = u & 0xFF
    body[..., 1] = (u >> 8) & 0xFF
    body[..., 2] = (u >> 16) & 0xFF
    return bytes(head) + body.tobytes()


def quantization_step(quantization: tuple[float, float]) -> float:
    """Physical size of one digital count for the given range."""
    return (quantization[1] - quantization[0]) / (DIGITAL_MAX - DIGITAL_MIN)


def with_subject(recording: Recording, subject: Subject) -> Recording:
    return replace(recording, subject=subject)
