import os
import pathlib

output_root = pathlib.Path(os.environ.get("BIOFILM_OUTPUT_ROOT", "runs"))
log_level = "INFO"
sweep_workers = 4

# adaptive Runge-Kutta defaults
abs_tol = 1e-10
rel_tol = 1e-8
dt_min = 1e-12
blowup_cap = 1e3

# outer extent of the finite-difference domains (r_max or half slab length)
fd_extent = 20.0
