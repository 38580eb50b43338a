"""Reduced one-dimensional models of atoms in strong magnetic fields.

Effective potentials, interaction coefficients, finite-difference solvers
and no-binding certificates.
"""

__version__ = "0.1.0"

from .errors import (AccuracyError, ConvergenceError, DomainTooSmallError, EnvelopeError,
                     InvalidInputError, Landau1DError, NearSingularError, SamplingError,
                     SizeError)
from .potentials import (DEFAULT_QUAD, FieldParams, Grid1D, QuadratureSpec, eval_vav, eval_vm,
                         eval_vm_field, vav, vm, vm_envelope, vm_field, vm_table)
from .interactions import (CoefficientVector, det_coefficients, eval_w, pair_coefficients,
                           slater_amplitudes, slater_pair_coefficients, w_values)
from .models import (ModelFamily, ModelSpec, make_custom_model, make_m_model, make_slater_model,
                     load_custom_model, model_at, parse_model)
from .spectral import (HartreeResult, ScfOptions, binding_test, discretize, exact_two_electron,
                       ground_state, hartree, hartree_energy, nmax_scan, physical_energy,
                       single_electron_energy, suggest_grid)
from .certificates import (BoundParams, CertificateReport, Partition, PartitionSpec, ahs_fit,
                           build_partition, certified_threshold, no_binding_certificate,
                           partition_check, theorem_thresholds)
