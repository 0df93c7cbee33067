"""Explicit lattice-point counts, ideal censuses and a Selberg-sieve Brun-Titchmarsh bound over number fields."""

from .errors import NfSieveError
from .field_data import FieldData, load_field, validate_field
from .nf_arith import NfIdeal

__version__ = "0.1.0"

__all__ = ["FieldData", "NfIdeal", "NfSieveError", "load_field", "validate_field", "__version__"]
