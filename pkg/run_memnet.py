#!/usr/bin/env python3
"""
Memristive Network Experiment Runner

Runs the lattice-network experiments (shortest path, switching dynamics,
entropy sweep, low memory content, damage and healing) from YAML experiment
files and writes plain-text maps, series and a manifest per run.
"""

import argparse
import sys
from pathlib import Path

from dotenv import load_dotenv

from memnet.config import EXPERIMENTS, ExperimentConfig, dump_config, load_config, load_preset, parse_overrides
from memnet.errors import ConfigError, OutputError, SimulationError
from memnet.experiments import RunArtifacts, SweepArtifacts, run_experiment
from memnet.outputs import RunLog, StageTracker, default_output_root, emit_result

# Load environment variables from .env file
load_dotenv()


def resolve_config(command: str, config_path: str | None, overrides: list[str] | None) -> ExperimentConfig:
    """Preset or --config file, then --override values"""
    if command == 'run':
        if not config_path:
            raise ConfigError('config', "'run' needs --config")
        config = load_config(config_path)
    elif config_path:
        config = load_config(config_path).with_overrides({'experiment': command})
    else:
        config = load_preset(command)
    values = parse_overrides(overrides)
    return config.with_overrides(values) if values else config


def resolve_output_dir(config: ExperimentConfig, out: str | None) -> Path:
    if out:
        return Path(out)
    if config.outputs:
        return Path(config.outputs)
    return default_output_root() / config.experiment


def print_config(config: ExperimentConfig):
    d = config.device
    p = config.pulse
    print(f"Experiment: {config.experiment}")
    print(f"Grid: {config.rows}x{config.cols}, source {config.source}, sink {config.sink}")
    print(f"Device: r_on={d.r_on:g} ohm, r_off={d.r_off:g} ohm, gamma={d.gamma:g}, I_t={d.i_threshold:g} A"
          f" (memory content {d.memory_content:g})")
    print(f"Pulse: {p.amplitude:g} V ({p.drive}), dt={p.dt:g} s, max_time={p.max_time:g} s")
    if config.damage:
        print(f"Damage: {', '.join(str(n) for n in config.damage)}")


def print_run(artifacts: RunArtifacts):
    path = artifacts.path
    status = "✓" if artifacts.steady else "⚠"
    state = "steady state" if artifacts.steady else "max_time reached before steady state"
    print(f"  {status} [{artifacts.name}] {state} after {artifacts.steps} steps ({artifacts.wall_time:.2f}s)")
    if path.found:
        print(f"  ✓ [{artifacts.name}] path of {path.path_length} units, {path.extra_on_count} ON units off the path")
    else:
        print(f"  ⚠ [{artifacts.name}] no ON path between source and sink ({len(path.on_units)} ON units)")
    if artifacts.undefined_entropy:
        print(f"  ⚠ [{artifacts.name}] no current across the entropy cut in {artifacts.undefined_entropy} "
              f"of {len(artifacts.trace)} samples (written as nan)")
    if artifacts.emergence is not None:
        mark = "✓" if artifacts.emergence else "⚠"
        print(f"  {mark} [{artifacts.name}] switching emerges from both terminals: {artifacts.emergence}")


def print_sweep(artifacts: SweepArtifacts):
    for series in artifacts.result:
        if series.error is not None:
            print(f"  ✗ ratio {series.ratio:g}: {series.error}")
            continue
        print(f"  ✓ ratio {series.ratio:g} at {series.amplitude:g} V: entropy {series.initial:.4f} -> "
              f"{series.final:.4f} ({len(series.samples)} samples, steady={series.steady})")
        if series.undefined_samples:
            print(f"  ⚠ ratio {series.ratio:g}: {series.undefined_samples} samples with no current across the cut")
    print(f"  ℹ sweep wall time {artifacts.wall_time:.2f}s")


def summarize(result) -> dict:
    """Metadata stored with the 'calculated' stage"""
    if isinstance(result, SweepArtifacts):
        return {'wall_time': result.wall_time, 'runs': len(result.result)}
    runs = result if isinstance(result, tuple) else (result,)
    return {
        'steps': [r.steps for r in runs],
        'steady': [r.steady for r in runs],
        'wall_time': sum(r.wall_time for r in runs),
    }


def main():
    """Main entry point"""
    parser = argparse.ArgumentParser(
        description='Run memristive lattice-network experiments',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Shortest path on the 11x11 preset
  python run_memnet.py fig2

  # Entropy sweep into a chosen directory
  python run_memnet.py fig3b --out results/entropy

  # Healing with a different damage set
  python run_memnet.py fig5 --override 'damage=[[6,5],[5,5]]'

  # Any experiment file
  python run_memnet.py run --config my-experiment.yaml --override pulse.dt=5e-6
        """
    )
    parser.add_argument(
        'command',
        choices=['run', *EXPERIMENTS],
        help='run = experiment named in --config; figN = preset (or --config with the experiment forced)'
    )
    parser.add_argument(
        '--config',
        help='Path to an experiment YAML file'
    )
    parser.add_argument(
        '--out',
        help='Output directory (default: outputs key, else $MEMNET_OUTPUT_DIR/<experiment>)'
    )
    parser.add_argument(
        '--override',
        action='append',
        metavar='KEY=VALUE',
        help='Override a config value by dotted key, value parsed as YAML (repeatable)'
    )
    parser.add_argument(
        '--keep-progress',
        action='store_true',
        help='Do not clear .logs/progress.json after a successful run'
    )

    args = parser.parse_args()

    progress = StageTracker()
    log = RunLog()
    try:
        progress.clear()
        progress.complete_stage('init', command=args.command)

        config = resolve_config(args.command, args.config, args.override)
        out_dir = resolve_output_dir(config, args.out)
        progress.complete_stage('configured', experiment=config.experiment, output_dir=str(out_dir))

        print("\n" + "="*60)
        print("Memristive Network Experiment")
        print("="*60)
        print_config(config)
        log.write(f"start {config.experiment} -> {out_dir}")

        print("\n" + "="*60)
        print("Calculation")
        print("="*60)
        result = run_experiment(config)
        progress.complete_stage('calculated', **summarize(result))

        if isinstance(result, SweepArtifacts):
            print_sweep(result)
        else:
            for artifacts in (result if isinstance(result, tuple) else (result,)):
                print_run(artifacts)
                log.write(f"{artifacts.name} steady={artifacts.steady} steps={artifacts.steps} "
                          f"path_length={artifacts.path.path_length} extra_on={artifacts.path.extra_on_count}")
        progress.complete_stage('read')

        print("\n" + "="*60)
        print("Outputs")
        print("="*60)
        manifests = emit_result(result, out_dir)
        effective = dump_config(config.with_outputs(out_dir), out_dir / 'effective_config.yaml')
        for manifest in manifests:
            print(f"  ✓ {manifest}")
        print(f"  ✓ {effective}")
        progress.complete_stage('emitted', manifests=[str(m) for m in manifests])
        log.write(f"done {config.experiment} manifests={len(manifests)}")

        progress.complete_stage('completed')
        if not args.keep_progress:
            progress.clear()
        return 0

    except KeyboardInterrupt:
        print("\n\nRun interrupted by user")
        return 130
    except ConfigError as e:
        print(f"\n✗ Error: {e}")
        return 1
    except (SimulationError, ValueError) as e:
        print(f"\n✗ Error: {e}")
        log.write(f"simulation error: {e}")
        return 2
    except OutputError as e:
        print(f"\n✗ Error: {e}")
        return 3
    except Exception as e:
        print(f"\n✗ Error: {e}")
        import traceback
        traceback.print_exc()
        return 1


if __name__ == '__main__':
    sys.exit(main())
