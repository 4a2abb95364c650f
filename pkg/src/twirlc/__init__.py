"""twirlc: randomized compiling for cycle-structured quantum circuits.

Provides the twirl-folding compiler pass, exact Pauli-transfer-matrix
channel algebra for the noise-tailoring theorems, noisy-circuit simulation
under overrotation / decoherence / non-Markovian chain models, the
net-parity decay bound, and a reproducible experiment harness with a CLI.
"""

__version__ = "0.1.0"

from .channels import (
    JointChannel,
    PauliChannel,
    SuperOp,
    block_twirl,
    fidelity_metrics,
    is_pauli_channel,
    joint_from_unitary,
    ptm_from_kraus,
    ptm_from_unitary,
    reduce_to_system,
    twirl_average,
)
from .circuit import (
    Circuit,
    EasyCycle,
    HardCycle,
    MeasurementSpec,
    gen_structured,
    gen_uniform_random,
    ideal_unitary,
    parse,
    serialize,
    validate,
)
from .compiler import (
    CompiledCircuit,
    RandomizationEnsemble,
    average_distribution,
    compile_ensemble,
    compile_once,
    dress,
    postprocess_counts,
)
from .errors import CircuitError, ConfigError, ParseError, ResourceCapError, TwirlcError
from .harness import ExperimentConfig, ResultTable, load_config, run_experiment, write_outputs
from .metrics import stability_statistic, tvd
from .parity import ParityProfile, decay_length, markov_oracle, net_parity_bound
from .pauli import (
    PauliString,
    PhasedPauli,
    correction_twirl,
    multiply,
    parse_pauli,
    sample_uniform,
    to_matrix,
)
from .sim import (
    DecoherenceModel,
    LatticeModel,
    OverrotationModel,
    SimResult,
    error_rate,
    lattice_error_curve,
    rdd_baseline,
    run_compiled,
    run_lattice,
    run_overrotation,
    run_overrotation_counts,
)
