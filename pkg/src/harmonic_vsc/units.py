"""Unit conversions. Everything internal is in Hartree atomic units."""

HARTREE_TO_CM1 = 219474.6313632


def au_to_cm1(omega):
    return omega * HARTREE_TO_CM1


def cm1_to_au(wavenumber):
    return wavenumber / HARTREE_TO_CM1
