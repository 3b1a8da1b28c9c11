from jointwitness.commands import history, sample, separability, sweep, witness

COMMANDS = [witness, separability, sweep, sample, history]

__all__ = ["COMMANDS"]
