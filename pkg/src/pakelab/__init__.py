"""Simulated password-authenticated key exchange and the attacks that break weak instantiations."""

from .groups import EC23, EC65519, MODP23, GroupParams, Kind, preset, rotation_groups, safe_prime_group
from .oracles import IdealCipher, IdealPermutation, OracleSuite, RandomOracle, iota
from .ciphers import Ciphertext, Instantiation, InstantiationSpec, decrypt, encrypt
from .protocols import AuthMode, Transcript, run_protocol
from .attacks import AttackReport, ConfirmationOracle, Dictionary
from .harness import ExperimentConfig, ExperimentResult, generate_dictionary, load_dictionary, run_experiment, summarize

__version__ = "0.1.0"
