"""Online quadrotor motor-efficiency estimation from trajectory residuals.

Subpackages cover the truth-model simulator, the geometric tracking
controller, sliding-window residuals with analytic Jacobians, MAD-based
robust reweighting, the primal-dual interior-point solver, the IRLS online
estimator, an EKF baseline, and the scenario/CLI layer that ties them
together.
"""

__version__ = "0.1.0"
