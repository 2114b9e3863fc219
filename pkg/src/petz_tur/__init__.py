"""Petz f-divergences, chi2_lambda mixtures and the universal TUR bound."""

from .divergence import (
    ClassicalPair, chi2_lambda_classical, chi2_lambda_quantum, csiszar,
    mixture_divergence, petz_divergence, petz_lr_superoperator,
)
from .errors import NumericalError, PetzTurError, ValidationError
from .generators import Generator, by_name, catalog, center, closed_form_divergence, dual
from .ns_bridge import ns_moment_triple, ns_observable, ns_pair
from .quadrature import QuadratureSpec
from .states import DensityMatrix, MomentTriple, Observable, moment_triple
from .tur import BinaryPair, TURReport, chapman_robbins_verify, h_lambda, saturating_pair, tur_bound, tur_report
from .weights import InversionConfig, WeightMeasure, analytic_weight, invert_weight, moment_checks, weight_from_phi

__version__ = "0.1.0"
