"""pdeeg: resting-state EEG band-feature extraction and HC/PD
classification.

Subsystems: `bdf` (BioSemi file I/O), `synth` (seeded fixtures and
cohorts), `preprocess` (averaging, resampling, band filters, epochs),
`spectral` (Welch PSD, entropy, spectrogram), `wavelet` (db4 analysis,
approximate entropy), `features` (per-epoch feature matrix), `models`
(RF/ET/SVM/KNN), `eval` (cross-validation, metrics, statistics), and the
`pdeeg` command line defined in `cli`.
"""

__version__ = "0.1.0"
