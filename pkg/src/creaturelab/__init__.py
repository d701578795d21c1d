"""Desk-scale laboratory for creature-forcing parameter arithmetic."""

__all__ = ["hyper", "layered", "params", "subatoms", "compounds", "blocks",
           "conditions", "cli"]
