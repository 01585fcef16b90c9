"""
Lattice networks of threshold memristive devices.

    memdevice    device model and Euler step
    lattice      grid topology, damage, state writes
    kirchhoff    per-step DC solve
    engine       pulse loop, steady state, readout
    analysis     entropy, ON/OFF classes, path extraction, switching rates
    config       YAML experiment files
    experiments  figure-reproduction runs
    outputs      map/series files, manifest, run log
"""

__version__ = "1.0.0"
