#!/usr/bin/env python3
"""
Experiment Config Validation Script

Validates experiment YAML files against the simulator's schema and flags
settings that load fine but will not produce a useful run (a pulse too weak
to switch anything, a coarse time step, a healing run without damage).
Run this before a long sweep to catch configuration issues early.

Usage:
    python scripts/config_validation.py presets/fig2/experiment.yaml
    python scripts/config_validation.py presets/*/experiment.yaml  # Validate multiple
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from memnet.analysis import on_off_boundary  # noqa: E402
from memnet.config import DEFAULT_SWEEP, config_from_dict  # noqa: E402
from memnet.errors import ConfigError, NoCircuitError  # noqa: E402
from memnet.experiments import prepare_lattice  # noqa: E402
from memnet.kirchhoff import KirchhoffSolver  # noqa: E402

# Steps of this size move a device by more than gamma * I_t * dt = 1 ohm at 1e-4 s
COARSE_DT = 1e-4


class ConfigValidator:
    """Validate one experiment file"""

    def __init__(self, config_path):
        self.path = Path(config_path)
        self.data = None
        self.config = None
        self.errors = []
        self.warnings = []
        self.info = []

    def load(self):
        """Load and parse the experiment file"""
        if not self.path.exists():
            self.errors.append(f"File not found: {self.path}")
            return False

        if self.path.suffix.lower() not in ('.yaml', '.yml'):
            self.errors.append(f"Not a YAML file: {self.path}")
            return False

        try:
            with open(self.path) as f:
                self.data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            self.errors.append(f"Invalid YAML: {e}")
            return False

        try:
            self.config = config_from_dict(self.data)
        except ConfigError as e:
            self.errors.append(f"Schema: {e}")
            return False
        return True

    def validate_drive(self):
        """Warn when the initial pulse leaves every device below threshold"""
        config = self.config
        lattice = prepare_lattice(config)
        v_applied, v_sink = config.pulse_spec().terminal_potentials
        try:
            sr = KirchhoffSolver(lattice).solve(lattice.x, v_applied, v_sink)
        except NoCircuitError as e:
            self.errors.append(f"Circuit: {e}")
            return None

        peak = float(np.max(np.abs(sr.branch_currents)))
        threshold = config.device.i_threshold
        self.info.append(f"Peak initial device current: {peak * 1e3:.2f} mA (threshold {threshold * 1e3:g} mA)")
        if peak < threshold:
            self.warnings.append(
                f"No device reaches the switching threshold at {config.pulse.amplitude:g} V "
                f"({config.pulse.drive} drive); the network will not change"
            )
        return peak

    def validate_time_step(self):
        pulse = self.config.pulse
        if pulse.dt > COARSE_DT:
            self.warnings.append(f"Time step {pulse.dt:g} s is coarse (> {COARSE_DT:g} s); ON/OFF reads may differ")
        steps = int(round(pulse.max_time / pulse.dt))
        self.info.append(f"At most {steps} steps, sampled every {pulse.record_every}")
        if pulse.record_every > steps:
            self.warnings.append("record_every exceeds the step budget; only the first and last samples are kept")

    def validate_experiment(self):
        """Experiment-specific checks"""
        config = self.config
        if config.experiment == 'fig5':
            if not config.damage:
                self.warnings.append("fig5 without damage: the healing pulse leaves the solution unchanged")
            else:
                self.info.append(f"Damage after the first pulse: {len(config.damage)} nodes")
        elif config.damage:
            self.info.append(f"Damage applied before the pulse: {len(config.damage)} nodes")

        if config.experiment == 'fig3b':
            points = config.sweep or DEFAULT_SWEEP
            if not config.sweep:
                self.info.append("No sweep given, using the four reference (r_on, amplitude) pairs")
            for point in points:
                self.info.append(f"  - r_off/r_on = {config.device.r_off / point.r_on:g} at {point.amplitude:g} V")
        elif config.sweep:
            self.warnings.append(f"sweep is only used by fig3b (experiment is {config.experiment})")

        if config.watch is not None and config.experiment != 'fig3a':
            self.info.append("watch list given; the switching-rate series is written for every single run")

    def validate(self):
        """Run all validations"""
        print(f"\n{'='*60}")
        print(f"Validating: {self.path}")
        print(f"{'='*60}")

        if self.load():
            config = self.config
            device = config.device
            print(f"\nExperiment: {config.experiment}")
            print(f"Grid: {config.rows}x{config.cols}")
            print(f"Memory content: {device.memory_content:g}")
            self.info.append(f"ON/OFF boundary: {on_off_boundary(device):.4g} ohm per unit")

            self.validate_drive()
            self.validate_time_step()
            self.validate_experiment()

        # Print results
        if self.info:
            print(f"\n✓ Info:")
            for msg in self.info:
                print(f"    {msg}")

        if self.warnings:
            print(f"\n⚠ Warnings:")
            for msg in self.warnings:
                print(f"    {msg}")

        if self.errors:
            print(f"\n✗ Errors:")
            for msg in self.errors:
                print(f"    {msg}")
            return False

        print(f"\n✓ Validation passed!")
        return True


def main(argv=None):
    parser = argparse.ArgumentParser(
        description='Validate memristive network experiment files',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python scripts/config_validation.py presets/fig2/experiment.yaml
    python scripts/config_validation.py presets/*/experiment.yaml
        """
    )

    parser.add_argument(
        'config_files',
        nargs='+',
        help='Experiment YAML file(s) to validate'
    )

    args = parser.parse_args(argv)

    all_passed = True

    for config_file in args.config_files:
        validator = ConfigValidator(config_file)
        if not validator.validate():
            all_passed = False

    print(f"\n{'='*60}")
    if all_passed:
        print("All experiment files validated successfully!")
        return 0
    else:
        print("Some validations failed - see errors above")
        return 1


if __name__ == '__main__':
    sys.exit(main())
