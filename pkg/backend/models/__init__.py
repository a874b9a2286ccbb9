from .waveguide import Rates, default_rates, derive_rates
from .operators import dark_population, driving_hamiltonian, feedback_operator, jump_operator
from .generators import (
    AppendixGenerator,
    FullGenerator,
    Generator,
    build_generator,
    generator_appendix,
    generator_full,
)

__all__ = [
    "Rates",
    "derive_rates",
    "default_rates",
    "jump_operator",
    "driving_hamiltonian",
    "feedback_operator",
    "dark_population",
    "Generator",
    "FullGenerator",
    "AppendixGenerator",
    "generator_full",
    "generator_appendix",
    "build_generator",
]
