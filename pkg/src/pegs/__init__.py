"""Privacy-calibrated categorical data synthesis.

Builds hash-compressed conditional count tables from a categorical dataset,
perturbs them with a Dirichlet prior calibrated to a privacy criterion
(epsilon-differential privacy, per sample or per block, or entropy
l-diversity), and draws synthetic records by sequentially resampling each
feature from its perturbed conditional. Ships a perturbed multiple-imputation
baseline and a utility-vs-risk evaluation harness.
"""

__version__ = "0.1.0"

from pegs.errors import BlocksFormatError, DataError, PegsError, PrivacyError, SchemaError

__all__ = [
    "__version__",
    "PegsError",
    "SchemaError",
    "DataError",
    "PrivacyError",
    "BlocksFormatError",
]
