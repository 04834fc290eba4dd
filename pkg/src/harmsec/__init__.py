"""Numerical verification of harmonic almost contact metric structures."""

from .catalog import ENTRIES, get_entry, perturb
from .chart import DEFAULT_FD, Chart, FDConfig, TensorFieldHandle
from .contact import AlmostContactStructure, StructureClassification, classify, validate_structure
from .harmonicity import HarmonicityReport, KappaMuFit, harmonic_report, kappa_mu_fit
from .identities import REGISTRY, CheckResult, Subject, check_identity, run_checks
from .report import ResidualReport, emit_report

__all__ = [
    "ENTRIES", "get_entry", "perturb",
    "DEFAULT_FD", "Chart", "FDConfig", "TensorFieldHandle",
    "AlmostContactStructure", "StructureClassification", "classify", "validate_structure",
    "HarmonicityReport", "KappaMuFit", "harmonic_report", "kappa_mu_fit",
    "REGISTRY", "CheckResult", "Subject", "check_identity", "run_checks",
    "ResidualReport", "emit_report",
]
