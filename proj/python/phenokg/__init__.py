"""Phenotype-driven knowledge graph expansion: python surface of the C++ core.

The heavy lifting (NOTEARS, spectral clustering, exact Bayesian inference,
Pareto selection, the online matching path) lives in the compiled extension;
this package re-exports the main operations.
"""

from phenokg._core import (
    BayesNet,
    IsolationForest,
    PhenokgError,
    acyclicity,
    decide,
    expm,
    make_golden_workspace,
    notears,
    pareto_front,
    run_pipeline,
    soft_assign,
    spectral_cluster,
    strongest_path,
    tfidf_cosine,
)

__all__ = [
    "BayesNet",
    "IsolationForest",
    "PhenokgError",
    "acyclicity",
    "decide",
    "expm",
    "make_golden_workspace",
    "notears",
    "pareto_front",
    "run_pipeline",
    "soft_assign",
    "spectral_cluster",
    "strongest_path",
    "tfidf_cosine",
]
