"""Figure rendering for qwork output files (CSV in, pdf+png out)."""

from .render import (CrooksResult, SchemaError, read_table, render_crooks,
                     render_sweep, render_workdist)

__version__ = "0.1.0"
