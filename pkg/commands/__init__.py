from . import classify, gamma4, invariants, plot, verify

# registration order is the order `--help` lists them
SUBCOMMANDS = (invariants, classify, gamma4, verify, plot)

__all__ = ["SUBCOMMANDS"]
