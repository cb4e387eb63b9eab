"""QUBO / Ising optimisation: models, TSP encoding and solvers."""

from .anneal import AnnealSchedule, anneal, anneal_restarts
from .qaoa import QaoaParams, qaoa_build, qaoa_optimize, sample_energy
from .qubo import (
    Assignment,
    IsingModel,
    QuboModel,
    brute_force,
    evaluate,
    ising_energy,
    ising_to_qubo,
    qubo_to_ising,
)
from .tsp import TspDecoder, TspInstance, brute_force_tour, default_penalty, encode_tsp

__all__ = [
    "AnnealSchedule",
    "Assignment",
    "IsingModel",
    "QaoaParams",
    "QuboModel",
    "TspDecoder",
    "TspInstance",
    "anneal",
    "anneal_restarts",
    "brute_force",
    "brute_force_tour",
    "default_penalty",
    "encode_tsp",
    "evaluate",
    "ising_energy",
    "ising_to_qubo",
    "qaoa_build",
    "qaoa_optimize",
    "qubo_to_ising",
    "sample_energy",
]
