"""Import the compiled extension and exercise each binding once.

Build first, then run with the library directory on PYTHONPATH:

    cargo build -p deckeval-py --features extension-module --release
    ln -sf ../target/release/libdeckeval_py.so python/deckeval_py.so
    python python/smoke_test.py
"""

import json
import math
import pathlib
import sys
import tempfile

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import deckeval_py as dv

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "crates" / "core" / "tests" / "data"


def main():
    report = json.loads(dv.evaluate_deck(str(DATA / "sample_deck")))
    assert report["deck"]["slide_count"] == 6, report["deck"]
    comp = report["components"]
    total = sum(v for k, v in comp.items() if k != "aesthetics" and v is not None)
    assert abs(comp["aesthetics"] - round(total, 2)) < 1e-9

    row = dv.evaluate_deck(str(DATA / "sample_deck"), format="table").splitlines()
    assert row[0].startswith("Usability,"), row

    with tempfile.TemporaryDirectory() as tmp:
        for name, level in dv.write_fixtures(tmp):
            got = json.loads(dv.evaluate_pei(str(pathlib.Path(tmp) / name)))
            assert got["level"] == level, (name, got["level"], level)
    web = json.loads(dv.evaluate_pei("https://example.com/deck"))
    assert web["level"] is None and web["max_level"] == 2

    assert dv.colorfulness(2, 1, bytes([128] * 6)) == 0.0
    red = dv.colorfulness(1, 1, bytes([255, 0, 0]))
    assert math.isclose(red, 0.3 * math.hypot(255, 127.5), rel_tol=1e-12)
    assert dv.contrast_score(21.0) == 1.0
    assert math.isclose(dv.rmssd([1.0, 3.0, 2.0]), math.sqrt((4 + 1) / 2))
    assert math.isclose(dv.deck_harmony_score([0.8, 0.8]), 4.0)
    assert math.isclose(dv.spearman([1, 2, 3], [3, 2, 1]), -1.0)

    bank = (DATA / "quizbank_valid.json").read_text()
    source = (DATA / "quizbank_source.txt").read_text()
    assert json.loads(dv.validate_quizbank(bank, source))["findings"] == []

    for bad in (lambda: dv.contrast_score(0.5), lambda: dv.evaluate_pei("deck.key")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"deckeval_py {dv.__version__}: ok")


if __name__ == "__main__":
    main()
