"""Inflation linear programs certifying genuine LOSR multipartite nonlocality."""
from .behaviors import Behavior, Event, check_nonsignalling, condition_expectation, marginalize, probability, product
from .certify import Certificate, solve_feasibility, sweep_noise, verify_certificate
from .constraints import ConstraintSystem, compile_system, shared_bit_system
from .inflation import enumerate_inflations, lp_inflations
from .network import Inflation, PartySpec, Scenario, canonical_scenario, validate_inflation

__all__ = [
    "Behavior", "Event", "check_nonsignalling", "condition_expectation", "marginalize", "probability",
    "product", "Certificate", "solve_feasibility", "sweep_noise", "verify_certificate",
    "ConstraintSystem", "compile_system", "shared_bit_system", "enumerate_inflations",
    "lp_inflations", "Inflation", "PartySpec", "Scenario", "canonical_scenario", "validate_inflation",
]
