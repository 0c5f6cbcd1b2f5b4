"""Intrusion-detection pipeline: cleaning, standardization, random oversampling,
cluster meta-features, PCA, tree ensembles and k-fold evaluation."""

__version__ = "0.1.0"
