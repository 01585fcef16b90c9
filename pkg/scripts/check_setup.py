#!/usr/bin/env python3
"""
Quick setup verification script for the memristive network simulator
Checks that the numerics stack, presets and output locations are usable
before starting a long run

Usage:
    python scripts/check_setup.py
"""

import importlib
import os
import shutil
import sys
from pathlib import Path

# Get project root (parent of scripts directory)
PROJECT_ROOT = Path(__file__).parent.parent

REQUIRED_PACKAGES = [
    ('numpy', 'numpy'),
    ('scipy', 'scipy'),
    ('networkx', 'networkx'),
    ('yaml', 'pyyaml'),
    ('dotenv', 'python-dotenv'),
]


def ensure_setup_files_exist():
    """Create .env from the sample if it doesn't exist"""
    env_file = PROJECT_ROOT / ".env"
    env_example = PROJECT_ROOT / "sample-configs" / "env.example"

    created_items = []

    if not env_file.exists():
        if env_example.exists():
            shutil.copy(env_example, env_file)
            created_items.append(f"Created .env from {env_example}")
        else:
            created_items.append(f"WARNING: {env_example} not found, cannot create .env")

    return created_items


def load_env_file():
    """Read .env without exporting it"""
    env_file = PROJECT_ROOT / ".env"
    if not env_file.exists():
        return {}
    from dotenv import dotenv_values
    return {k: v for k, v in dotenv_values(env_file).items() if v is not None}


def check_item(name, check_func, critical=True):
    """Check an item and print status"""
    try:
        result, message = check_func()
        status = "✓" if result else "✗"
        color = "\033[92m" if result else "\033[91m"
        reset = "\033[0m"
        level = "" if critical else " (optional)"
        print(f"{color}{status}{reset} {name}{level}: {message}")
        return result
    except Exception as e:
        print(f"✗ {name}: Error - {e}")
        return False


def check_python():
    """Check Python version"""
    version = sys.version_info
    if version.major >= 3 and version.minor >= 10:
        return True, f"Python {version.major}.{version.minor}.{version.micro}"
    return False, f"Python {version.major}.{version.minor} (need 3.10+)"


def check_package(module_name, dist_name):
    try:
        module = importlib.import_module(module_name)
    except ImportError:
        return False, f"Not installed (pip install {dist_name})"
    return True, getattr(module, '__version__', 'installed')


def check_presets():
    """Every preset loads and validates"""
    sys.path.insert(0, str(PROJECT_ROOT))
    from memnet.config import EXPERIMENTS, load_preset

    for name in EXPERIMENTS:
        load_preset(name)
    return True, ", ".join(EXPERIMENTS)


def check_output_dir(env_vars):
    """MEMNET_OUTPUT_DIR exists or can be created"""
    root = Path(env_vars.get("MEMNET_OUTPUT_DIR") or "results")
    if not root.is_absolute():
        root = PROJECT_ROOT / root
    probe = root
    while not probe.exists():
        probe = probe.parent
    if not probe.is_dir():
        return False, f"Not a directory: {probe}"
    if not os.access(probe, os.W_OK):
        return False, f"Not writable: {probe}"
    return True, f"{root}" + ("" if root.exists() else " (created on first run)")


def check_venv():
    """Check if virtual environment is activated"""
    venv = os.getenv('VIRTUAL_ENV')
    if venv:
        return True, f"Active ({os.path.basename(venv)})"
    return False, "Not activated (run: source .venv/bin/activate)"


def main():
    print("\n" + "=" * 70)
    print("Memristive Network Simulator - Setup Check")
    print("=" * 70 + "\n")

    created_items = ensure_setup_files_exist()
    if created_items:
        print("📁 Setup files created:")
        for item in created_items:
            print(f"   {item}")
        print()

    critical_passed = []
    optional_passed = []

    print("─" * 70)
    print("System Requirements")
    print("─" * 70)

    critical_passed.append(check_item("Python 3.10+", check_python))
    optional_passed.append(check_item("Virtual environment", check_venv, critical=False))

    print()
    print("─" * 70)
    print("Packages")
    print("─" * 70)

    for module_name, dist_name in REQUIRED_PACKAGES:
        critical_passed.append(check_item(dist_name, lambda m=module_name, d=dist_name: check_package(m, d)))
    optional_passed.append(check_item("pytest", lambda: check_package('pytest', 'pytest'), critical=False))

    if not all(critical_passed):
        print("\n✗ Install the missing packages first: pip install -r requirements.txt")
        sys.exit(1)

    env_vars = load_env_file()
    if not env_vars:
        print("\n⚠️  No .env file found or it's empty; defaults apply.")

    print()
    print("─" * 70)
    print("Experiments and Outputs")
    print("─" * 70)

    critical_passed.append(check_item("Presets", check_presets))
    critical_passed.append(check_item("MEMNET_OUTPUT_DIR", lambda: check_output_dir(env_vars)))
    optional_passed.append(check_item(
        "LOCAL_NAMESPACE",
        lambda: (bool(env_vars.get("LOCAL_NAMESPACE")), env_vars.get("LOCAL_NAMESPACE") or "Not set"),
        critical=False
    ))

    # Summary
    print()
    print("=" * 70)

    critical_ok = all(critical_passed)
    optional_ok = all(optional_passed)

    if critical_ok:
        print("✓ All critical requirements met! Ready to run.")
        print("\nRun: python run_memnet.py fig2")
        if not optional_ok:
            print("\n⚠️  Some optional items need attention (see above).")
    else:
        print("✗ Some critical requirements are missing.")
        print("\nPlease fix the issues above before running:")
        print("  1. pip install -r requirements.txt")
        print("  2. Check presets/*/experiment.yaml with scripts/config_validation.py")
        print("  3. Point MEMNET_OUTPUT_DIR in .env at a writable directory")
        sys.exit(1)

    print("=" * 70 + "\n")


if __name__ == '__main__':
    main()
