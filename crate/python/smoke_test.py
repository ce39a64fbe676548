"""Build the extension with cargo, load it, and exercise the main entry points.

Run from anywhere: python3 python/smoke_test.py
"""

import atexit
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "mubar-py"], cwd=ROOT, check=True
    )
    lib = ROOT / "target" / "release"
    src = next(p for p in (lib / "libmubar_py.so", lib / "libmubar_py.dylib") if p.exists())
    out = Path(tempfile.mkdtemp(prefix="mubar_py_"))
    atexit.register(shutil.rmtree, out, True)
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy(src, out / f"mubar_py{suffix}")
    sys.path.insert(0, str(out))


def main():
    build()
    import mubar_py as mb

    hopf = mb.StringLink.from_braid(2, [1, 1])
    assert hopf.m == 2
    lk = hopf.linking()
    assert lk[0][1] == lk[1][0] == 1, lk
    mu = hopf.mu_table(5)["entries"]
    assert mu["1,2,1"] == "-1" and mu["1,1,2,1"] == "1", mu

    report = hopf.verify(9)
    assert report["pass"], report
    # Gamma = -z for the Hopf string link; series are [degree, num, den] terms
    g = hopf.gamma(9)
    assert g["gamma_z"] == [[1, "-1", "1"]], g["gamma_z"]

    same = mb.StringLink.from_longitudes(hopf.longitudes())
    assert same.mu_table(7) == hopf.mu_table(7)

    borromean = mb.StringLink.from_braid(3, [1, -2, 1, -2, 1, -2], depth=6)
    assert borromean.mu_table(4)["entries"]["1,2,3"] == "1"
    try:
        borromean.mu_table(8)
    except ValueError:
        pass
    else:
        raise AssertionError("order above depth accepted")

    assert mb.conway_braid(2, [1, 1, 1]) == ["1", "0", "1"]
    assert mb.conway_seifert([[-1, 1], [0, -1]]) == (["1", "0", "1"], True)
    assert mb.reduce_word("X1 X2 X2^-1 X1") == "X1 X1"
    assert mb.artin_apply(2, [1], "X1") == "X1 X2 X1^-1"
    assert len(mb.pure_braids(2, 6)) == 7
    print("python smoke test ok")


if __name__ == "__main__":
    main()
