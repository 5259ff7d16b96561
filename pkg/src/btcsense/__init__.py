"""Collective-spin open-system simulator for AC-field sensing.

Core pieces: Dicke-sector spin operators (``spin_ops``), joint integration
of the master equation and its field derivative (``dynamics``), quantum
Fisher information estimators (``qfi``), the cumulant-closed mean-field
flow (``meanfield``), envelope/scaling fits (``analysis``), and the run
orchestration behind the ``btc-sense`` command (``config``, ``runs``,
``cli``).
"""

__version__ = "0.1.0"

from .analysis import (
    AnsatzFit,
    PeakSummary,
    ScalingFit,
    extract_envelope,
    fit_alpha_asymptote,
    fit_ansatz,
    fit_gamma_scaling,
    peak_summary,
)
from .config import RunConfig, resonance_defaults
from .dynamics import (
    JointState,
    ObservableRecord,
    SimParams,
    Trajectory,
    ac_term_apply,
    btc_liouvillian_apply,
    integrate,
    joint_rhs,
    observables,
)
from .integrator import IntegrationFailure, integrate_adaptive
from .meanfield import (
    BlochTrajectory,
    mf_integrate,
    mf_qfi_series,
    mf_reduced_state,
    mf_rhs,
)
from .qfi import (
    BoundReport,
    QfiValue,
    bounds,
    cramer_rao,
    fidelity,
    qfi_fidelity,
    qfi_spectral,
)
from .spin_ops import (
    SpinOperators,
    build_spin_operators,
    check_density_matrix,
    expectation,
    polarized_up_state,
)
