"""Configuration, experiment drivers, output writers and the command-line interface."""
from .config import ConfigError, SimulationConfig, config_echo, load_config, parse_config_text
from .drivers import (NumericalError, run_convergence, run_elasticity, run_pwave,
                      run_scaling_bench, run_stability_sweep)
from .output import EnergyRecord, read_csv, write_vtk

__all__ = ["ConfigError", "SimulationConfig", "config_echo", "load_config", "parse_config_text",
           "NumericalError", "run_convergence", "run_elasticity", "run_pwave",
           "run_scaling_bench", "run_stability_sweep", "EnergyRecord", "read_csv", "write_vtk"]
