"""Regenerates data/filters/dmey29.txt from the PyWavelets 'dmey' filter bank.

The shipped filter is the central 29 taps of the dmey decomposition high-pass
filter, renormalized to unit l2 norm. Requires `pip install PyWavelets`.
"""
import sys

import numpy as np
import pywt

LENGTH = 29


def main(path):
    taps = np.asarray(pywt.Wavelet("dmey").dec_hi)
    start = (len(taps) - LENGTH) // 2
    f = taps[start:start + LENGTH]
    f = f / np.linalg.norm(f)
    with open(path, "w") as fh:
        fh.write("# discrete Meyer (dmey) wavelet filter, central 29 taps, unit l2 norm\n")
        for v in f:
            fh.write("%.17g\n" % v)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/filters/dmey29.txt")
