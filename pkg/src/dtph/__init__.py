"""Discrete-time scattering port-Hamiltonian systems.

Subspace (linear relation) algebra with Cayley transforms, standard and
descriptor state-space systems with scattering-passivity checks, the
geometric formulation with a resistive port, and structure-preserving
interconnection of two systems.
"""

from .errors import *  # noqa: F401,F403
from .linalg import DEFAULT_TOL, Tolerances
from .subspace import (ClassificationReport, KernelRep, Subspace, as_graph,
                       cayley, cayley_inverse, classify, compose, contains,
                       flip, from_image, from_kernel, graph, to_kernel)
from .systems import (DescriptorSystem, StandardSystem, StorageWeight, Trajectory,
                      check_dissipation, find_storage_weight, index_le_one,
                      is_scattering_ph, reduce_to_standard, simulate_descriptor,
                      simulate_standard)
from .geometric import (GeometricPH, dilate, discretize_dh, simulate as
                        simulate_geometric, step as geometric_step, validate)
from .interconnect import (CouplingRelation, closed_loop, elimination_oracle,
                           general_interconnect, invertibility_tests,
                           redheffer_coupling, redheffer_reduce)

__version__ = "0.1.0"
