"""Polynomial fuzzy vaults over GF(2^m), record-linkage attacks and bounds."""

from polyvault.attack import (
    CapExceeded,
    Exhausted,
    Failure,
    FailureReason,
    FullRecoveryOutput,
    GuessOverflowError,
    PartialRecoveryOutput,
    anchored_oracle,
    brute_force_driver,
    exhaustive_oracle,
    full_recovery,
    partial_recovery,
    single_record_attack,
    verify_shared_factor_identity,
)
from polyvault.bounds import (
    BoundValue,
    full_recovery_lower_bound,
    full_recovery_upper_bound,
    leakage_bound,
    partial_bounds,
    single_record_bound,
)
from polyvault.experiments import ExperimentConfig, full_experiment, partial_experiment
from polyvault.gf2m import GF2m, field
from polyvault.vault import (
    RandomEncoding,
    VaultError,
    VaultRecord,
    apply_encoding,
    deserialize,
    enroll_blended,
    enroll_deterministic,
    enroll_probabilistic,
    new_encoding,
    serialize,
    unlock,
)

__version__ = "0.1.0"

__all__ = [
    "BoundValue",
    "CapExceeded",
    "Exhausted",
    "ExperimentConfig",
    "Failure",
    "FailureReason",
    "FullRecoveryOutput",
    "GF2m",
    "GuessOverflowError",
    "PartialRecoveryOutput",
    "RandomEncoding",
    "VaultError",
    "VaultRecord",
    "__version__",
    "anchored_oracle",
    "apply_encoding",
    "brute_force_driver",
    "deserialize",
    "enroll_blended",
    "enroll_deterministic",
    "enroll_probabilistic",
    "exhaustive_oracle",
    "field",
    "full_experiment",
    "full_recovery",
    "full_recovery_lower_bound",
    "full_recovery_upper_bound",
    "leakage_bound",
    "new_encoding",
    "partial_bounds",
    "partial_experiment",
    "partial_recovery",
    "serialize",
    "single_record_attack",
    "single_record_bound",
    "unlock",
    "verify_shared_factor_identity",
]
