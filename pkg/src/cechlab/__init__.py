"""Random Cech complexes on the flat torus: construction, homology, Morse census and Theta-cycles."""
from .cech import CechComplex, Simplex, build_complex, from_simplices, miniball_radius, read_complex, write_complex
from .errors import (CechLabError, ConfigError, DegenerateInputError, DomainError, FitError, InputError,
                     MorseEulerViolation, PreconditionError)
from .experiments import SweepConfig, TrialRecord, estimate_constants, run_trial, sweep
from .geometry import GeometryContext, TorusPoint, lift_cluster, toroidal_distance
from .homology import BettiVector, betti_numbers, boundary_matrix, euler_characteristic
from .morse import (CriticalCandidate, CriticalCensus, circumsphere, critical_candidate,
                    enumerate_critical_points, euler_coefficients, expected_Ck, expected_euler, is_covered)
from .sampling import PointCloud, RngStream, read_cloud, sample_poisson, write_cloud_csv
from .theta import ThetaCycle, ThetaParams, annulus_covered, count_theta_cycles, phi

__version__ = "0.1.0"
