"""Broadcast network simulator: PIF and fragment-merging leader election."""

__version__ = '0.3.0'
