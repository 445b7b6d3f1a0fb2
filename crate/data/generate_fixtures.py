"""Regenerate the FCIDUMP fixtures and their provenance sidecars.

Requires PySCF. Run from this directory:

    python generate_fixtures.py
"""

import json

import numpy as np
from pyscf import fci, gto, scf
from pyscf.tools import fcidump

ANGSTROM = "Angstrom"


def chain(n, d):
    return [("H", (0.0, 0.0, i * d)) for i in range(n)]


def cube(d):
    return [
        ("H", (x * d, y * d, z * d))
        for x in (0, 1)
        for y in (0, 1)
        for z in (0, 1)
    ]


FIXTURES = {
    "h4_chain_1.0": dict(atoms=chain(4, 1.0), charge=0, d=1.0, shape="linear chain"),
    "h6_chain_1.0": dict(atoms=chain(6, 1.0), charge=0, d=1.0, shape="linear chain"),
    "h8_cube_2.5": dict(atoms=cube(2.5), charge=0, d=2.5, shape="cube"),
}


def build(name, spec):
    mol = gto.M(
        atom=spec["atoms"],
        basis="sto-3g",
        charge=spec["charge"],
        spin=0,
        unit=ANGSTROM,
        verbose=0,
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.max_cycle = 500
    e_scf = mf.kernel()
    if not mf.converged:
        mf = mf.newton()
        e_scf = mf.kernel()
    assert mf.converged, name

    cis = fci.FCI(mf)
    cis.conv_tol = 1e-13
    cis.max_cycle = 500
    e_fci, _ = cis.kernel()

    fcidump.from_scf(mf, f"{name}.fcidump", tol=1e-15)

    sidecar = {
        "name": name,
        "geometry": {
            "unit": ANGSTROM,
            "shape": spec["shape"],
            "bond_length": spec["d"],
            "atoms": [[sym, list(xyz)] for sym, xyz in spec["atoms"]],
        },
        "basis": "sto-3g",
        "charge": spec["charge"],
        "frozen_orbitals": [],
        "n_orb": int(mol.nao),
        "n_elec": int(mol.nelectron),
        "scf_energy": float(e_scf),
        "fci_energy": float(e_fci),
        "generator": "pyscf " + __import__("pyscf").__version__,
    }
    with open(f"{name}.json", "w") as f:
        json.dump(sidecar, f, indent=2)
        f.write("\n")
    print(f"{name}: scf={e_scf:.10f} fci={e_fci:.10f}")


if __name__ == "__main__":
    np.set_printoptions(precision=12)
    for name, spec in FIXTURES.items():
        build(name, spec)
