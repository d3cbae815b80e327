#!/usr/bin/env python3
"""Smoke test for the nectk_py extension module.

Builds the cdylib with cargo (unless NECTK_SKIP_BUILD is set), loads it
directly from the target directory, and walks the main flows: network
queries, code verification, rate reduction, family construction, decoding,
and the probability machinery.

Run from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile


def repo_root() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.dirname(here)


def build_and_import():
    root = repo_root()
    profile = os.environ.get("NECTK_PROFILE", "release")
    if not os.environ.get("NECTK_SKIP_BUILD"):
        cmd = ["cargo", "build", "-p", "nectk-py"]
        if profile == "release":
            cmd.append("--release")
        subprocess.run(cmd, cwd=root, check=True)
    lib = os.path.join(root, "target", profile, "libnectk_py.so")
    if not os.path.exists(lib):
        sys.exit(f"built library not found at {lib}")
    # import machinery wants the platform-conventional file name
    tmp = tempfile.mkdtemp(prefix="nectk_py_")
    shutil.copy(lib, os.path.join(tmp, "nectk_py.so"))
    sys.path.insert(0, tmp)
    import nectk_py

    return nectk_py


def main() -> None:
    nectk = build_and_import()
    checks = 0

    def check(cond, what):
        nonlocal checks
        assert cond, what
        checks += 1
        print(f"  ok: {what}")

    print("network queries")
    net = nectk.Network.relay_sample()
    check(net.node_count == 4 and net.channel_count == 7, "relay sample dimensions")
    check(net.sinks == ["t1", "t2"], "sink names")
    check(net.min_cut("t1") == 3 and net.min_cut("t2") == 3, "min-cuts are 3")
    check(net.pattern_rank(["e3", "e6"], "t1") == 1, "severed pair has rank 1")
    check(net.count_rt("t1", 2) == 5, "|R_t1(2)| = 5")
    reparsed = nectk.Network(net.to_json())
    check(reparsed.channel_ids == net.channel_ids, "JSON round-trip")

    comb = nectk.Network.combination(6, 4)
    check(comb.channel_count == 66, "combination network has 66 channels")
    check(
        comb.count_rt("t1", 2, max_channels=70) == 24,
        "combination |R_t(2)| = 24",
    )

    print("code verification")
    code = nectk.Code.relay_sample()
    check(code.rate == 2 and code.field == 3, "fixture parameters")
    check(code.is_regular() and code.is_mds(), "fixture is a regular MDS code")
    report = json.loads(code.verify())
    check(
        [s["d_min"] for s in report["sinks"]] == [2, 2],
        "minimum distance 2 at both sinks",
    )
    check(
        code.extended_kernel("e6") == [0, 1, 0, 0, 1, 0, 0, 1, 0],
        "extended kernel of e6",
    )
    check(
        code.decoding_matrix("t1")[0] == [1, 1, 0],
        "first decoding-matrix row at t1",
    )
    check(code.q_patterns("t1") == [
        ["e1", "e2"],
        ["e1", "e3"],
        ["e1", "e6"],
        ["e2", "e3"],
        ["e2", "e6"],
    ], "critical patterns at t1")

    print("reduction and families")
    check(code.choose_k() == [1], "chosen fold vector is [1]")
    reduced = code.reduce([1])
    check(reduced.rate == 1 and reduced.is_mds(), "reduced code is rate-1 MDS")
    check(reduced.min_distance("t1") == 3, "reduced distance is 3")
    codes, ks = nectk.build_family_from(code)
    check([c.rate for c in codes] == [2, 1] and ks == [[1]], "family from fixture")
    codes31, _ = nectk.build_family(net, 3, 31, seed=7)
    check([c.rate for c in codes31] == [3, 2, 1], "GF(31) family of rates 3..1")
    check(all(c.is_mds() for c in codes31), "every GF(31) member is MDS")
    r2 = json.loads(codes31[1].to_json())
    r1 = json.loads(codes31[2].to_json())
    internal = lambda doc: [k for k in doc["kernels"] if k["node"] != "s"]
    check(internal(r2) == internal(r1), "internal kernels shared across rates")

    print("transmission and decoding")
    received = code.transmit([1, 2], [0] * 7)
    check(received["t1"] == [0, 1, 2], "error-free received vector at t1")
    check(reduced.correction_radius("t1") == 1, "radius 1 at rate 1")
    decoded, weight, candidates = reduced.decode("t1", received_vector([2], reduced))
    check(decoded == [2] and weight == 0, "clean decode round-trip")
    sim = reduced.simulate([2], ["e4"], [1])
    check(
        sim["t1"][0] == [2] and sim["t2"][0] == [2],
        "single error inside the radius decodes at both sinks",
    )

    print("probability machinery")
    bound = nectk.mds_lower_bound(net, 2, 31)
    check(abs(bound - (1 - 8 / 30) ** 2) < 1e-12, "MDS lower bound value")
    exact_form, binomial_form = nectk.joint_lower_bound(net, 2, 31)
    check(0 <= binomial_form <= exact_form <= bound, "bound ordering")
    prob = json.loads(nectk.estimate_success(net, 31, 2, 200, seed=1))
    check(prob["trials"] == 200, "trial count in the report")
    check(prob["wilson_low"] >= bound, "empirical estimate clears the bound")
    exact, binom = nectk.field_size_bound(net, 2)
    check(exact == 10 and binom == 42, "field size thresholds for the relay net")

    print(f"\nsmoke test passed: {checks} checks")


def received_vector(message, code):
    """Error-free received symbols at t1 for a message."""
    return code.transmit(message, [0] * 7)["t1"]


if __name__ == "__main__":
    main()
