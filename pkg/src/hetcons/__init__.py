"""Behavioral consistency checking for heterogeneous model collections.

State machines and Petri nets are translated into graph grammars, composed
along synchronized transition pairs, explored into a Kripke structure and
checked against CTL constraints.
"""

from importlib.resources import files

__version__ = "0.1.0"


def running_example_path():
    """Path of the bundled resource-contention scenario."""
    return files(__package__) / "data" / "running_example.json"
