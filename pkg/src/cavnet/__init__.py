"""Quantum-correlation propagation in a fiber-coupled cavity-QED network.

Six polariton qubits in two fiber-linked three-cavity chains, evolved under
a zero-temperature microscopic master equation, with the full correlation
toolbox: concurrence, entanglement of formation, quantum discord, tangle
bounds and monogamy diagnostics.
"""

from .qla import (
    DensityMatrix,
    Operator,
    PureState,
    Spectrum,
    density,
    hermitian_eigendecomposition,
    ket,
    partial_trace,
    purity,
    tensor,
    von_neumann_entropy,
)
from .model import (
    InitialStateSpec,
    NetworkConfig,
    build_effective_chain_hamiltonian,
    build_full_chain_hamiltonian,
    build_initial_state,
    build_network_hamiltonian,
    effective_coupling,
    map_interleaved_index,
    interleaved_label,
    werner_state,
)
from .davies import (
    DaviesChannel,
    DecayChannel,
    GeneratorSpec,
    bohr_frequencies,
    build_davies_channels,
    chain_generator,
    lindblad_rhs,
    local_chain_generator,
    network_generator,
    site_lowering_operator,
)
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    evolve,
    evolve_factorized,
    sample_grid,
    scalar_series,
    split_network_generator,
)
from .correlations import (
    CorrelationReport,
    MeasurementBasis,
    PairSelector,
    classical_correlation,
    concurrence,
    correlation_report,
    delta_fanchini,
    entanglement_sum,
    eof_from_concurrence,
    monogamy_residual,
    mutual_information,
    one_tangle,
    pair_state,
    quantum_discord,
    tangle_bounds,
    tangle_pure,
)
from .runner import (
    PeakEvent,
    ScenarioSpec,
    Table,
    peak_sequence,
    run_scenario,
    simulate_table,
    transmission_details,
    transmission_ratio,
)

__version__ = "0.1.0"
