"""Quick check of the Python bindings; run after `maturin develop` in crates/python."""

import sclift


def main():
    tau = sclift.Permutation.shift(4, 1)
    assert tau.order() == 4
    assert tau.compose(tau.inverse()).images == [0, 1, 2, 3]

    uncoupled = sclift.SCCode.from_cutting_vector(17, 1, [17, 17, 17])
    assert uncoupled.count("brute")["total"] == 4624

    code = sclift.SCCode.from_cutting_vector(7, 5, [1, 3, 5])
    assert code.shape() == (3 * 7 * 6, 7 * 7 * 5)
    line, brute = code.count("line"), code.count("brute")
    assert line["total"] == brute["total"]
    assert sclift.SCCode.parse(code.to_text()).count()["total"] == line["total"]

    window = code.window(2)
    assert window["per_position"] == code.window(2, method="brute")["per_position"]

    xi, report = sclift.best_cutting_vector(7, 5)
    result = sclift.optimize(7, 5, config="beam=16\nrestarts=2", seed=1)
    assert result["value"] <= report["total"]
    assert sclift.SCCode.from_bm(result["bm"]["rows"], 5).count()["total"] == result["value"]

    print("smoke test passed: best xi", xi, "total", report["total"], "optimized", result["value"])


if __name__ == "__main__":
    main()
