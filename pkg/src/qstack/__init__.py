"""qstack: a desk-scale quantum accelerator toolchain.

Layers, bottom up: a circuit IR with a textual assembly format
(:mod:`qstack.ir`, :mod:`qstack.qasm`), a seeded state-vector simulator
with depolarizing noise (:mod:`qstack.simulator`), a mapper, router and
scheduler for nearest-neighbour topologies (:mod:`qstack.compiler`),
QUBO/Ising solvers (:mod:`qstack.optimizer`) and application kernels
(:mod:`qstack.kernels`).
"""

from .compiler import CompileOptions, ScheduledCircuit, Topology, compile_circuit
from .errors import QStackError
from .ir import Bundle, Circuit, Gate, Opcode
from .qasm import SourceError, parse, print_circuit
from .simulator import NoiseModel, QuantumState, RunSummary, run

__version__ = "0.1.0"

__all__ = [
    "Bundle",
    "Circuit",
    "CompileOptions",
    "Gate",
    "NoiseModel",
    "Opcode",
    "QStackError",
    "QuantumState",
    "RunSummary",
    "ScheduledCircuit",
    "SourceError",
    "Topology",
    "compile_circuit",
    "parse",
    "print_circuit",
    "run",
]
