"""Smoke test for the heilbronn extension module.

Build and install first:
    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/heilbronn-*.whl
"""

import json
import math

import heilbronn


def main():
    cert = heilbronn.solve(5, model="final", eps=1e-6, starts=20)
    assert cert.is_closed(), cert
    assert abs(cert.z_lb - math.sqrt(3) / 9) < 1e-5, cert
    print(cert)

    best = heilbronn.multistart(6, starts=20, seed=0)
    assert abs(best.min_area() - 0.125) < 1e-6, best
    print(best)

    c8 = heilbronn.corpus_entry(8)
    level, mult = c8.clusters()[0]
    assert mult == 12 and len(c8.sorted_areas()) == 56
    report = json.loads(c8.structure_json())
    assert len(report["critical"]) == 12

    for n in range(3, 17):
        assert heilbronn.verify_corpus(n), n
    expr, value = heilbronn.corpus_delta(11)
    assert expr == "(rat 1 27)" and abs(value - 1 / 27) < 1e-15

    entries = json.loads(heilbronn.corpus_json())
    n9 = next(e for e in entries if e["n"] == 9)
    assert heilbronn.verify_json(json.dumps(n9))
    n9["exact"][2][1] = "(add (rat 19 166) (mul (rat 3 166) (sqrt 65)))"
    assert not heilbronn.verify_json(json.dumps(n9))

    config, p, guarantee, ok = heilbronn.erdos(5)
    assert (p, guarantee, ok) == (5, "1/50", True) and len(config) == 5
    assert heilbronn.roth_upper(16) == (1, 14)
    rows = heilbronn.bound_table(6, 16)
    assert all(cpz > best_known for _, best_known, _, cpz in rows)
    assert heilbronn.signed_area((0, 0), (1, 0), (0, 1)) == 0.5

    try:
        heilbronn.Configuration([(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("a point outside the square was accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
