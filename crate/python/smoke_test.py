"""Smoke test for the pyrigidlab extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyrigidlab-*.whl
"""

import pyrigidlab as rl


def main():
    prefix = rl.QuerySet.load("builtin:prefix:4")
    assert prefix.n == 4 and len(prefix) == 4

    rep = rl.rigidity_value(prefix, 1)
    assert rep["value"] == rl.t_direct(prefix, 1) == 1
    ds = rl.build_plan(prefix, rep["witness"])
    assert ds.time == rep["value"] and ds.verify()

    u = rl.Subspace(4, ["1100", "0011"])
    assert u.dim == 2 and u.contains("1111")
    assert u.distance("1010") == 2

    ups = rl.gen_upsilon(2)
    assert len(ups) == 10
    assert rl.rigidity_value(ups, 1)["value"] >= 1
    assert all(rl.rank([v[:2], v[2:]]) <= 1 for v in ups.vectors())

    assert rl.bias(["10", "01"]) == "1/4"
    assert rl.moment(2, 1) == "7/16"
    assert rl.count_low_rank(2, 1) == 10
    exact, bound = rl.message_bits(8, 3, 2)
    assert exact == 12 and exact <= bound

    sim = rl.protocol_sim("row-store", ["10", "01"], 1, trials=20, seed=7)
    assert sim["success"] == sim["closed_form_success"]

    v = rl.Subspace.random(16, 4, 1)
    far = rl.find_far_rank_one(v)
    assert far["certified"] >= far["lower_bound"]

    try:
        rl.rigidity_value(rl.QuerySet.load("builtin:random:20:3:1"), 8, cap_subspaces=10)
    except rl.CapExceeded:
        pass
    else:
        raise AssertionError("cap not enforced")

    print("pyrigidlab smoke test passed")


if __name__ == "__main__":
    main()
