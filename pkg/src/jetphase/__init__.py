"""jetphase: geometry and dynamics on the first-jet phase space of timelike motions.

A Lorentz metric and a closed electromagnetic 2-form equip the
seven-dimensional space of events-with-velocities with a 1-form/2-form pair
whose kernel direction is the particle flow.  The package evaluates that
structure, integrates the unparametrized equation of motion, and turns every
structural identity (duality, closure, symmetry, conservation, momentum-map
equivariance) into a runnable residual.
"""

__version__ = "0.1.0"

from .errors import (ChartDomain, ConfigError, DegenerateDenominator,
                     JetPhaseError, MissingDerivatives, MissingEMField,
                     MissingPotential, NotTimelike, ObserverNotAdapted,
                     SingularMetric)
from .fields import (ChartSpec, Constants, EMField, MetricField,
                     SpacetimeModel, check_closed, check_potential,
                     christoffel, metric_compatibility_residual)
from .phase import (AdaptedFrame, PhasePoint, adapted_frame, alpha0,
                    normalized_d, perp_metrics, phase_point, tau, tau_hat,
                    theta_projector)
from .dynamics import (DualityResiduals, Observer, PhaseStructure,
                       ZERO_OBSERVER, duality_residuals, el_density,
                       hamiltonian, lagrangian, lagrangian_hessian,
                       legendre_residual, omega, phase_connection,
                       phase_structure, potential_theta, reeb, two_vector)
from .motion import IntegratorOptions, Trajectory, eom_rhs, integrate
from .symmetry import (ScalarField, SpecialPhaseFunction, VectorField,
                       commutator, conservation_residual, holonomic_lift,
                       is_killing, lie_connection, lie_em, lie_metric,
                       self_holonomy_residual, special_bracket,
                       special_eval, special_gradient,
                       special_hamiltonian_lift)
from .momentum import (GroupElement, SymmetryAlgebra, build_algebra,
                       charge_drift, equivariance_residual, momentum_map,
                       prolong_action)
from .catalog import CatalogModel, by_name, minkowski, reissner_nordstrom, schwarzschild
