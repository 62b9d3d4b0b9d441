"""Smoke test for the memetrace_py extension.

Build and install first:  maturin develop -m crates/python/Cargo.toml
"""

import math
import tempfile

import memetrace_py as mt


def main():
    pool = mt.Pool(1000.0, 1.0)
    assert math.isclose(pool.spot_price(), 0.001)
    paid, after = pool.swap_exact_token_out(500.0)
    assert math.isclose(paid, 1.0) and math.isclose(after.spot_price(), 0.004)
    assert math.isclose(after.k, pool.k)

    rising = [float(i) for i in range(1, 40)]
    values = mt.rsi(rising, 14)
    assert values[:14] == [None] * 14 and all(v == 100.0 for v in values[14:])

    assert mt.preprocess_name("Baby-DOGE $Moon") == ["baby", "doge", "moon"]
    model = mt.KeywordModel(["doge moon", "pepe frog", "doge inu", "cat coin", "baby doge"], cutoff=3)
    top = model.keywords()
    assert len(top) == 3 and "doge" not in top
    assert model.is_meme(top[0].upper() + " 2.0") and not model.is_meme("DOGE 2.0")

    with tempfile.TemporaryDirectory() as tmp:
        labels = mt.simulate("rug_pull", seed=3, out=tmp, tokens=3, days=40)
        events = mt.detect(tmp, "rug")
        hits = {(e["token_id"], e["kind"]) for e in events}
        assert all((l["token_id"], l["kind"]) in hits for l in labels), (labels, events)
        rows = mt.returns(tmp, 1704067200, window_days=40)
        assert len(rows) == 3

    print("smoke test ok: pool, rsi, classifier, simulate/detect/returns")


if __name__ == "__main__":
    main()
