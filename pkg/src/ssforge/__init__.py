"""Surfaces of spherical type via support function, built from holomorphic pairs."""

from .core import (
    PointJets,
    SurfaceEval,
    VMatrix,
    christoffel,
    compute_V_closed,
    compute_V_direct,
    curvatures,
    evaluate,
    fundamental_forms,
    gauss_map,
    immersion,
    point_jets,
    support_representation,
)
from .expr import ParseError, eval_jet, parse, to_source
from .jet import Jet2, JetDomainError
from .oracle import FDConfig, oracle_eval, weingarten_fit
from .rotational import RotationalParams, profile, rotational_surface

__version__ = "0.1.0"
