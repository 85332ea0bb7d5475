"""Smoke test for the netmimo_py extension module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`.
"""

import netmimo_py as nm


def main():
    grid = nm.Layout.grid(4)
    assert len(grid) == 16
    assert abs(nm.cooperation_radius(0.6) - 2.5) < 1e-12

    conv = nm.allocation(nm.Layout.grid(6), 0.6, 50.0, "conventional")
    dist = nm.allocation(nm.Layout.grid(6), 0.6, 50.0, "distance")
    ratio = dist["total_bits"] / conv["total_bits"]
    assert 0.05 <= ratio <= 0.08, ratio
    print(f"size ratio at 50 dB: {ratio:.4f}")

    curves = nm.run_simulation(
        grid, 0.6, ["perfect", "distance", "zero"], [40.0, 50.0, 60.0, 70.0, 80.0], 200, seed=3
    )
    slopes = {c["policy"]: c["dof_slope"] for c in curves}
    print("slopes:", {k: round(v, 3) for k, v in slopes.items()})
    assert 0.9 <= slopes["perfect"] <= 1.1
    assert abs(slopes["distance"] - slopes["perfect"]) <= 0.1
    assert slopes["zero"] < slopes["distance"] - 0.3

    config = nm.preset("fig1-desk").replace("trials = 500", "trials = 20")
    csv, meta = nm.run_experiment(config)
    assert csv.startswith("policy,alpha,snr_db,user,mean_rate_bits,stderr,trials,rejections")
    assert "[config]" in meta

    rows = nm.verify(trials=100, resolvent_pairs=50)
    for name, measured, relation, bound, ok in rows:
        print(f"{name:<32} {measured:>12.4e} {relation:<2} {bound:>12.4e} {'PASS' if ok else 'FAIL'}")
    print("smoke test ok")


if __name__ == "__main__":
    main()
