"""Regenerate the bundled ECG-like impulse response.

The system is a 256-tap vector with 28 nonzero taps shaped like one
heartbeat: a small P bump, a Q dip, a dominant R spike, an S dip and a
broad T bump.  Everything else is exactly zero.

    python scripts/make_ecg_ir.py src/sparselms/data/ecg_ir.txt
"""
import sys

import numpy as np

N_TAPS = 256


def gaussian_bump(n, amplitude, width):
    offsets = np.arange(n) - (n - 1) / 2
    return amplitude * np.exp(-0.5 * (offsets / width) ** 2)


def make_ecg_ir():
    w = np.zeros(N_TAPS)
    w[40:45] = gaussian_bump(5, 0.12, 1.2)  # P wave
    w[70:72] = [-0.08, -0.15]  # Q
    w[72:77] = [0.30, 0.75, 1.00, 0.70, 0.25]  # R
    w[77:80] = [-0.25, -0.30, -0.10]  # S
    w[120:133] = gaussian_bump(13, 0.30, 3.0)  # T wave
    return np.round(w, 6)


def main(argv):
    path = argv[1] if len(argv) > 1 else "src/sparselms/data/ecg_ir.txt"
    w = make_ecg_ir()
    assert np.count_nonzero(w) == 28
    np.savetxt(path, w, fmt="%.6f")


if __name__ == "__main__":
    main(sys.argv)
