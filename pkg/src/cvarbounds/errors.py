"""Shared semantic exceptions."""


class DomainError(ValueError):
    """Input lies outside an operation's finite or supported domain.

    Raised instead of returning infinity sentinels (e.g. infinite binary KL)
    or silently truncating (e.g. horizons too long for exact enumeration);
    silent sentinels mask calibration bugs downstream.
    """
