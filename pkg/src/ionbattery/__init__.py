"""Ion-chain quantum battery: charging dynamics of N trapped ions with
power-law hopping, collectively coupled to one truncated boson mode.

Layers, lowest first:
  hilbert     composite space indexing, sparse operators, pure states
  model       Hamiltonian terms and the counter-rotating toggles
  dynamics    ground states, spectra, dense and Krylov propagation
  observables reductions, energies, ergotropy, entropy, populations
  harness     run configs, experiment drivers, CSV/JSON output
  cli         `ionbattery evolve | maxscan | spectrum`
"""

from .errors import (ConfigError, HermiticityError, NumericalConsistencyError,
                     PropagationError)
from .hilbert import (HilbertSpec, Operator, PureState, boson_annihilator,
                      identity_operator, spin_site_matrix, spin_site_operator,
                      tensor_embed)
from .model import (DEFAULT_POSITIONS, Hamiltonian, ModelParams,
                    build_hamiltonian, build_spin_hamiltonian,
                    excitation_number, pair_coupling_matrix, parity_operator)
from .dynamics import (EvolutionTrace, SpectrumScan, ground_state,
                       initial_state, propagate, spectrum_scan)
from .observables import (DensityMatrix, charging_energy, ergotropy,
                          ergotropy_raw, ion_energy, leakage, magnetization,
                          partial_trace, passive_energy, population_difference,
                          site_populations, von_neumann_entropy)
from .harness import (RunConfig, config_from_mapping, config_to_mapping,
                      default_config, evaluate_trace, parse_config,
                      render_config, run_evolution, run_max_scan,
                      run_spectrum_scan, run_trace_sweep)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "HermiticityError", "NumericalConsistencyError",
    "PropagationError",
    "HilbertSpec", "Operator", "PureState", "boson_annihilator",
    "identity_operator", "spin_site_matrix", "spin_site_operator",
    "tensor_embed",
    "DEFAULT_POSITIONS", "Hamiltonian", "ModelParams", "build_hamiltonian",
    "build_spin_hamiltonian", "excitation_number", "pair_coupling_matrix",
    "parity_operator",
    "EvolutionTrace", "SpectrumScan", "ground_state", "initial_state",
    "propagate", "spectrum_scan",
    "DensityMatrix", "charging_energy", "ergotropy", "ergotropy_raw",
    "ion_energy", "leakage", "magnetization", "partial_trace",
    "passive_energy", "population_difference", "site_populations",
    "von_neumann_entropy",
    "RunConfig", "config_from_mapping", "config_to_mapping", "default_config",
    "evaluate_trace", "parse_config", "render_config", "run_evolution",
    "run_max_scan", "run_spectrum_scan", "run_trace_sweep",
    "__version__",
]
