"""Python smoke tests over the bound core."""

import json
import math
import os
from pathlib import Path

import pytest

import empaudit


def data_dir() -> Path:
    env = os.environ.get("EMPAUDIT_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def test_grid_cardinality():
    grid = empaudit.build_grid()
    assert len(grid) == 315
    assert len(set(grid)) == 315
    assert (None, None, None) in grid
    assert len(empaudit.isolation_personas()) == 19


def test_render_clause():
    clause = empaudit.render(("0-17", "male", "Protestant Europe"))
    assert clause == "0-17 age category, Protestant Europe culture and male gender"
    assert empaudit.render((None, None, None)) is None
    assert empaudit.render((None, "female", None)) == "female gender"


def test_lexicon_reference_vectors():
    lexicon = empaudit.Lexicon.load(str(data_dir() / "lexicon" / "nrc_intensity_sample.txt"))
    assert lexicon.intensity("angry") == [0.824, 0.0, 0.469, 0.0, 0.0, 0.0, 0.0, 0.0]
    assert lexicon.intensity("Ashamed") == [0.0, 0.0, 0.438, 0.0, 0.0, 0.719, 0.0, 0.0]
    assert "angry" in lexicon
    assert "notaword" not in lexicon
    with pytest.raises(empaudit.EmpauditError):
        lexicon.intensity("notaword")


def test_metrics():
    assert empaudit.rouge_l_f1("the cat sat", "the cat") == pytest.approx(0.8)
    one_hot_anger = [1.0] + [0.0] * 7
    one_hot_joy = [0.0] * 4 + [1.0] + [0.0] * 3
    assert empaudit.emd(one_hot_anger, one_hot_joy) == pytest.approx(1.0)
    assert empaudit.emd(one_hot_anger, one_hot_anger) == 0.0

    shift = empaudit.affective_shift(
        [0.824, 0, 0.469, 0, 0, 0, 0, 0], [0, 0, 0.438, 0, 0, 0.719, 0, 0]
    )
    assert shift[0] == pytest.approx(0.824)
    assert shift[5] == pytest.approx(-0.719)

    assert empaudit.lexical_accuracy(["Joy."], ["joy"]) == 1.0


def test_log_odds_hand_example():
    results = empaudit.log_odds(
        {"x": 5, "other": 5}, {"x": 1, "other": 9}, {"x": 1, "other": 1}, 1.0
    )
    delta = {token: d for token, d, _ in results}["x"]
    assert delta == pytest.approx(math.log(19.0 / 3.0), abs=1e-9)


def test_masking_and_parsing():
    masked = empaudit.mask_self_disclosure(
        "I feel angry at my brother for breaking my bike.", "anger"
    )
    assert masked == "I feel [MASK] at my brother for breaking my bike."

    parsed = empaudit.parse_affective("[OUTPUT 1]: a student\n[OUTPUT 2]: joy")
    assert parsed["emotion_word"] == "joy"
    assert parsed["persona_recall"] == "a student"


def test_kcenter():
    assert empaudit.kcenter_sample([[0.0], [1.0], [10.0]], 3, 0) == [0, 2, 1]


def test_statistics():
    p, lo, hi = empaudit.significance([0.0] * 10, bootstrap_n=500, seed=1)
    assert p == 1.0
    p2, _, _ = empaudit.significance([1.0] * 40, bootstrap_n=2000, seed=1)
    assert p2 < 0.001
    assert empaudit.significance([0.1, 0.2, 0.3], 1000, 7) == empaudit.significance(
        [0.1, 0.2, 0.3], 1000, 7
    )
    equivalent, _ = empaudit.equivalence_to_base([0.0] * 10, margin=0.01, seed=3)
    assert equivalent
    assert empaudit.spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)


def test_ate_isolation():
    table = empaudit.OutcomeTable("m")
    base = (None, None, None)
    treated = (None, "male", None)
    for i, (with_v, without_v) in enumerate([(0.9, 0.4), (0.5, 0.2), (0.7, 0.3)]):
        rid = f"r{i}"
        table.set_affect(rid, treated, [with_v] + [0.0] * 7)
        table.set_affect(rid, base, [without_v] + [0.0] * 7)
        table.set_epitome(rid, treated, (2, 0, 0))
        table.set_epitome(rid, base, (0, 0, 0))
    estimates = empaudit.ate_isolation(table, "Gender", "male", bootstrap_n=300, seed=0)
    by_dim = {e["dimension"]: e for e in estimates}
    assert by_dim["anger"]["mean_shift"] == pytest.approx(0.4)
    assert by_dim["ER"]["mean_shift"] == pytest.approx(2.0)
    assert by_dim["anger"]["n"] == 3


def test_pipeline_end_to_end(tmp_path):
    manifest = {
        "corpus": str(data_dir() / "corpus" / "sample_experiences.csv"),
        "lexicon": str(data_dir() / "lexicon" / "nrc_intensity_sample.txt"),
        "mode": "isolation",
        "tasks": ["affective", "cognitive"],
        "chat": {"kind": "mock", "seed": 7},
        "embedding": {"kind": "mock", "seed": 7, "width": 32},
        "scorer": {"kind": "keyword"},
        "cache_dir": str(tmp_path / "cache"),
        "output_dir": str(tmp_path / "out"),
        "seed": 11,
        "sample_k": 3,
        "bootstrap_n": 200,
        "parallelism": 2,
    }
    manifest_path = tmp_path / "manifest.json"
    manifest_path.write_text(json.dumps(manifest))
    out_dir = Path(empaudit.run(str(manifest_path)))
    assert (out_dir / "reports" / "shift_tables.csv").exists()
    assert (out_dir / "analysis" / "ate_isolation.csv").exists()
    assert (out_dir / "reports" / "completion.txt").exists()


def test_keyword_scorer_bounds():
    er, ip, ex = empaudit.score_keyword(
        "My landlord refused to repair the heating.",
        "I'm sorry, that heating problem sounds hard. Have you talked to anyone?",
    )
    for level in (er, ip, ex):
        assert 0 <= level <= 2
