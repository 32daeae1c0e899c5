#!/usr/bin/env python3
# Regenerates the frozen oracle fixtures under tests/data from RDKit.
# Not needed to build or run the test suite; kept so the fixtures are reproducible.
#
#   python3 tests/oracle/make_fixtures.py <path to rdkit Data/NCI/first_5K.smi>

import csv
import random
import sys
from pathlib import Path

from rdkit import Chem, RDLogger
from rdkit.Chem import rdFingerprintGenerator
from rdkit.Chem.Scaffolds import MurckoScaffold

RDLogger.DisableLog("rdApp.*")

HERE = Path(__file__).resolve().parent
DATA = HERE.parent / "data"
SUPPORTED = {5, 6, 7, 8, 9, 15, 16, 17, 35, 53}

CURATED_VALID = [
    "c1ccccc1", "CCc1ccccc1", "CCO", "CC(=O)Oc1ccccc1C(=O)O", "CC(=O)Nc1ccc(O)cc1",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C", "CC(C)Cc1ccc(C(C)C(=O)O)cc1", "c1ccc2ccccc2c1",
    "c1cc[nH]c1", "c1ccc2[nH]ccc2c1", "c1c[nH]cn1", "c1ccncc1", "c1ccsc1", "c1ccoc1",
    "C[N+](C)(C)C", "O=[N+]([O-])c1ccccc1", "CC(=O)[O-]", "C1CCC2(CC1)CCCC2",
    "C1CC2CCC1C2", "O=C1CCCCC1", "C=C1CCCC1", "N#Cc1ccccc1", "Cn1cccc1",
    "O=S(=O)(c1ccccc1)N1CCCC1", "c1ccc(CCC2CC2)cc1", "OCC1OC(O)C(O)C(O)C1O",
    "CN1CCC[C@H]1c1cccnc1", "Clc1ccc(Cl)cc1", "Brc1ccccc1I", "FC(F)(F)c1ccccc1",
    "OB(O)c1ccccc1", "COP(=O)(OC)OC", "CS(C)=O", "O=C(O)c1ccccc1O",
    "CC12CCC3c4ccc(O)cc4CCC3C1CCC2O", "c1ccc(-c2ccccc2)cc1", "C1CCNCC1", "c1cnc2ncccc2c1",
    "O=c1cc[nH]cc1", "C[n+]1ccccc1", "CCN(CC)C(=O)c1cccnc1", "NC(=O)c1ccc[nH]1",
]
CURATED_INVALID = [
    "C(C)(C)(C)(C)C", "c1cccc1", "CO(C)C", "CN(C)(C)C", "FC(F)(F)(F)F",
    "O=C=O=C", "C1=CC=CC=C1=C", "ClC(Cl)(Cl)(Cl)Cl",
]


def sanitizes(smiles):
    mol = Chem.MolFromSmiles(smiles, sanitize=False)
    if mol is None:
        return None, False
    try:
        Chem.SanitizeMol(mol)
    except Exception:
        return mol, False
    return mol, True


def morgan_counts(mol):
    unfolded = rdFingerprintGenerator.GetMorganGenerator(radius=2)
    sparse = unfolded.GetSparseCountFingerprint(mol)
    folded = rdFingerprintGenerator.GetMorganGenerator(radius=2, fpSize=1024)
    return len(sparse.GetNonzeroElements()), folded.GetFingerprint(mol).GetNumOnBits()


def write_curated():
    rows = []
    for smi in CURATED_VALID:
        mol, ok = sanitizes(smi)
        assert ok, smi
        can = Chem.MolToSmiles(mol)
        scaf = Chem.MolToSmiles(MurckoScaffold.GetScaffoldForMol(mol))
        n_features, popcount = morgan_counts(mol)
        rows.append([can, 1, mol.GetNumAtoms(), mol.GetNumBonds(),
                     sum(a.GetIsAromatic() for a in mol.GetAtoms()), scaf, n_features, popcount])
    for smi in CURATED_INVALID:
        mol, ok = sanitizes(smi)
        assert not ok, smi
        rows.append([smi, 0, mol.GetNumAtoms(), mol.GetNumBonds(), 0, "", 0, 0])
    with open(DATA / "curated50.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["smiles", "valid", "atoms", "bonds", "aromatic_atoms", "murcko",
                    "morgan_features", "morgan_popcount"])
        w.writerows(rows)


def write_nci_sample(nci_path):
    keep = []
    with open(nci_path) as fh:
        for line in fh:
            smi, ident = line.split()
            mol = Chem.MolFromSmiles(smi)
            if mol is None or "." in smi:
                continue
            atoms = list(mol.GetAtoms())
            if not 3 <= len(atoms) <= 60:
                continue
            if any(a.GetAtomicNum() not in SUPPORTED or abs(a.GetFormalCharge()) > 2
                   for a in atoms):
                continue
            keep.append((f"NCI{ident}", Chem.MolToSmiles(mol, isomericSmiles=False)))
    rng = random.Random(20240611)
    rng.shuffle(keep)
    keep = keep[:500]
    actives = set(rng.sample(range(500), 5))
    with open(DATA / "nci_sample500.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "smiles", "label"])
        for i, (ident, smi) in enumerate(keep):
            w.writerow([ident, smi, int(i in actives)])


if __name__ == "__main__":
    write_curated()
    if len(sys.argv) > 1:
        write_nci_sample(sys.argv[1])
