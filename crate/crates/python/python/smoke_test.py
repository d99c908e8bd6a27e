"""Smoke test for the velergo extension: python python/smoke_test.py"""

import math

import velergo


def quarters(n, start=1959):
    return [f"{start + i // 4}-{3 * (i % 4) + 1:02d}-01" for i in range(n)]


def main():
    n = 120
    gdp_text = "DATE,GDP\n" + "".join(
        f"{d},{506.0 * math.exp(0.016 * i + 0.012 * math.sin(1.3 * i)):.3f}\n"
        for i, d in enumerate(quarters(n))
    )
    gdp = velergo.parse_series_csv(gdp_text)
    m2 = velergo.Series(
        "M2", quarters(n), [286.6 * math.exp(0.017 * i) for i in range(n)]
    )
    assert len(gdp) == n and gdp.name == "GDP"

    v = velergo.velocity(gdp, m2)
    assert len(v) == n
    r = velergo.log_returns(v)
    assert len(r) == n - 1
    train, hold = velergo.split_at(v, "1980-01-01")
    assert len(train) + len(hold) == n

    gx = velergo.mle_gbm(gdp)
    gm = velergo.mle_gbm(m2)
    assert gx.n_obs == n - 1 and gx.sigma > 0
    assert abs(gx.se_mu - gx.sigma / math.sqrt(gx.n_obs * gx.dt)) < 1e-12

    deltas, zs = velergo.z_velocity_path(0.06, 0.02, 0.03, 0.015, 1.8, 10.0, 40, seed=1)
    assert len(deltas) == len(zs) == 41 and zs[0] == 0.0
    var = velergo.z_variance(0.06, 0.02, 0.03, 0.015, 1.8, 10.0, 10.0)
    assert var > 0
    s = velergo.z_statistic(0.06, 0.02, 0.03, 0.015, 1.8, 20.0, 80, 500, seed=2)
    assert math.isfinite(s)

    mr = velergo.mean_reversion_test([math.sin(0.9 * i) for i in range(200)])
    assert mr.reverting and mr.slope < 0

    fan = velergo.forecast_velocity(1.7, 0.06, 0.02, 0.03, 0.015, horizon=2.0, n_paths=500, seed=3)
    assert len(fan.dates) == 9 and len(fan.quantiles) == len(fan.quantile_levels)
    assert fan.to_csv().startswith("date,mean")

    m = velergo.compute_metrics([1.0, 2.0, 3.0], [1.0, 2.0, 4.0])
    assert abs(m.sse - 1.0) < 1e-12 and m.n == 3

    try:
        velergo.z_variance(0.06, 0.02, 0.03, 0.015, 1.4, 10.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("beta <= 1.5 accepted")
    try:
        velergo.read_series_csv("/nonexistent/series.csv")
    except OSError:
        pass
    else:
        raise AssertionError("missing file accepted")

    print("velergo smoke test ok")


if __name__ == "__main__":
    main()
