import numpy as np
import pytest

from pdeeg import synth
from pdeeg.config import PipelineConfig
from pdeeg.pipeline import extract_features

SMALL_LABELS = synth.EEG_LABELS_32[:8]


@pytest.fixture(scope="session")
def small_cohort():
    """4 HC + 4 PD, 60 s at 512 Hz, 8 EEG channels, clear alpha contrast."""
    spec = synth.CohortSpec(
        n_hc=4, n_pd=4, contrast_uv2=40.0, seed=7,
        duration_s=60.0, n_eeg_channels=8,
    )
    return list(synth.iter_cohort(spec))


@pytest.fixture(scope="session")
def small_config():
    return PipelineConfig(channels=SMALL_LABELS)


@pytest.fixture(scope="session")
def small_features(small_cohort, small_config):
    fm, diags = extract_features(small_cohort, small_config)
    return fm


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
