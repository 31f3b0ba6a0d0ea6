"""Adiabatic search for Diophantine solutions on su(1,1) oscillator modes."""
from .algebra import Kind, Realization, TruncatedMode, char_f, char_g, char_h, energy
from .coherent import amplitudes_by_recurrence, auto_displacement, closed_form_bg, density
from .diophantine import Polynomial, evaluate, format_polynomial, oracle_search, parse
from .encode import TensorSpace, build_hamiltonian, encode_hd, encode_hi, initial_state
from .errors import KhqaError
from .evolve import EvolveConfig, RunResult, Verdict, diagnostics, integrate, run_khqa

__version__ = "0.1.0"

__all__ = [
    "Kind", "Realization", "TruncatedMode", "char_f", "char_g", "char_h", "energy",
    "amplitudes_by_recurrence", "auto_displacement", "closed_form_bg", "density",
    "Polynomial", "evaluate", "format_polynomial", "oracle_search", "parse",
    "TensorSpace", "build_hamiltonian", "encode_hd", "encode_hi", "initial_state",
    "KhqaError", "EvolveConfig", "RunResult", "Verdict", "diagnostics", "integrate", "run_khqa",
]
