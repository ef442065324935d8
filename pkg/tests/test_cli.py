import pytest

from bago.cli import main

FIXTURE_SETS = [
    ("employees", "query.cq"),
    ("managers", "query_managed.cq"),
    ("prime", "query.cq"),
    ("prime_pair", "query.cq"),
]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_satisfiable(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "check",
        "-T", str(fixtures_dir / "employees" / "tbox.dl"),
        "-A", str(fixtures_dir / "employees" / "abox.bag"),
    )
    assert code == 0 and out == "SATISFIABLE\n"


def test_check_unsatisfiable(capsys, tmp_path):
    (tmp_path / "t.dl").write_text("DISJ A B\n")
    (tmp_path / "a.bag").write_text("A(a)\nB(a)\n")
    code, out, _ = run(capsys, "check", "-T", str(tmp_path / "t.dl"),
                       "-A", str(tmp_path / "a.bag"))
    assert code == 1 and out == "UNSATISFIABLE\n"


def test_answer_golden(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "answer",
        "-T", str(fixtures_dir / "employees" / "tbox.dl"),
        "-A", str(fixtures_dir / "employees" / "abox.bag"),
        "-q", str(fixtures_dir / "employees" / "query.cq"),
        "--via", "both",
    )
    assert code == 0 and out == "(Lee) 3\n"


@pytest.mark.parametrize("name,query", FIXTURE_SETS)
def test_both_paths_agree_byte_for_byte(capsys, fixtures_dir, name, query):
    base = fixtures_dir / name
    outputs = []
    for via in ("chase", "rewrite"):
        code, out, _ = run(
            capsys, "answer", "-T", str(base / "tbox.dl"),
            "-A", str(base / "abox.bag"), "-q", str(base / query), "--via", via,
        )
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_answer_refuses_non_rooted(capsys, fixtures_dir):
    code, _, err = run(
        capsys, "answer",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "-q", str(fixtures_dir / "managers" / "query_some.cq"),
    )
    assert code == 3 and "refused" in err


def test_parse_error_exit_code(capsys, tmp_path, fixtures_dir):
    (tmp_path / "bad.cq").write_text("q(x) :- A(x\n")
    code, _, err = run(
        capsys, "answer",
        "-T", str(fixtures_dir / "employees" / "tbox.dl"),
        "-A", str(fixtures_dir / "employees" / "abox.bag"),
        "-q", str(tmp_path / "bad.cq"),
    )
    assert code == 2 and "error" in err


def test_chase_dump(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "chase",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "--depth", "2",
    )
    assert code == 0
    assert out == (
        "# depth=2\n"
        "Emp(Lee) 1\n"
        "Mngr(Hill) 1\n"
        "Mngr(_w(Lee,hasMngr,1)) 1\n"
        "hasMngr(Lee,_w(Lee,hasMngr,1)) 1\n"
    )


def test_cert_exit_codes(capsys, fixtures_dir):
    base = [
        "cert",
        "-T", str(fixtures_dir / "employees" / "tbox.dl"),
        "-A", str(fixtures_dir / "employees" / "abox.bag"),
        "-q", str(fixtures_dir / "employees" / "query.cq"),
        "--tuple", "(Lee)",
    ]
    assert run(capsys, *base, "-k", "3")[0] == 0
    assert run(capsys, *base, "-k", "4")[0] == 1
    assert run(capsys, *base, "-k", "0")[0] == 0
    assert run(capsys, *base, "-k", "inf")[0] == 1
    assert run(capsys, *base, "-k", "3", "--via", "both")[0] == 0


def test_rewrite_output_feeds_eval_balg(capsys, tmp_path, fixtures_dir):
    out_file = tmp_path / "rw.balg"
    code, _, _ = run(
        capsys, "rewrite",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-q", str(fixtures_dir / "managers" / "query_managed.cq"),
        "-o", str(out_file),
    )
    assert code == 0
    code, out, _ = run(
        capsys, "eval-balg",
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "-q", str(out_file),
    )
    assert code == 0
    assert out.endswith("(Lee) 1\n")


def test_rewrite_explain_table(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "rewrite",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-q", str(fixtures_dir / "managers" / "query_managed.cq"),
        "--explain",
    )
    assert code == 0
    assert "# z={} verdict=realisable" in out
    assert "# z={y} verdict=realisable" in out
    assert "probe=1" in out


def test_crosscheck_single_and_random(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "crosscheck",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "-q", str(fixtures_dir / "managers" / "query_managed.cq"),
    )
    assert code == 0 and out.startswith("PASS\n(Lee) 1\n")
    code, out, _ = run(capsys, "crosscheck", "--random", "25", "--seed", "7")
    assert code == 0 and out.strip() == "crosscheck: 25/25 PASS"


def test_gen_3col_files_round_trip(capsys, tmp_path, fixtures_dir):
    out_dir = tmp_path / "gen"
    code, _, _ = run(
        capsys, "gen-3col",
        "-G", str(fixtures_dir / "triangle.graph"),
        "--out-dir", str(out_dir),
    )
    assert code == 0
    from bago import parse_abox, parse_cq, parse_tbox

    parse_tbox((out_dir / "tbox.dl").read_text())
    parse_abox((out_dir / "abox.bag").read_text())
    parse_cq((out_dir / "query.cq").read_text())
    assert (out_dir / "threshold.txt").read_text() == "11\n"


def test_gen_3col_model_eval(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "gen-3col",
        "-G", str(fixtures_dir / "triangle.graph"),
        "--coloring", str(fixtures_dir / "triangle.coloring"),
        "--eval-model",
    )
    assert code == 0
    assert "model-eval: 10 (proper 3-coloring yields exactly 10)" in out


def test_gen_3col_variant_r_is_refused_by_answer(capsys, tmp_path, fixtures_dir):
    out_dir = tmp_path / "genr"
    code, _, _ = run(
        capsys, "gen-3col",
        "-G", str(fixtures_dir / "triangle.graph"),
        "--variant", "r", "--out-dir", str(out_dir),
    )
    assert code == 0
    code, _, err = run(
        capsys, "answer",
        "-T", str(out_dir / "tbox.dl"),
        "-A", str(out_dir / "abox.bag"),
        "-q", str(out_dir / "query.cq"),
    )
    assert code == 3 and "refused" in err


def test_chase_rejects_negative_depth(capsys, fixtures_dir):
    code, _, err = run(
        capsys, "chase",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "--depth", "-1",
    )
    assert code == 2 and "nonnegative" in err


def test_chase_refuses_unsatisfiable(capsys, tmp_path):
    (tmp_path / "t.dl").write_text("DISJ A B\n")
    (tmp_path / "a.bag").write_text("A(a)\nB(a)\n")
    code, _, err = run(capsys, "chase", "-T", str(tmp_path / "t.dl"),
                       "-A", str(tmp_path / "a.bag"), "--depth", "1")
    assert code == 3 and "refused" in err


def test_eval_balg_rejects_ill_formed(capsys, tmp_path, fixtures_dir):
    (tmp_path / "bad.balg").write_text("(diff (atom A x) (atom A y))\n")
    code, _, err = run(
        capsys, "eval-balg",
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "-q", str(tmp_path / "bad.balg"),
    )
    assert code == 2 and "error" in err


def test_answer_empty_bag_prints_empty(capsys, tmp_path, fixtures_dir):
    (tmp_path / "q.cq").write_text('q(x) :- Unheard(x)\n')
    code, out, _ = run(
        capsys, "answer",
        "-T", str(fixtures_dir / "managers" / "tbox.dl"),
        "-A", str(fixtures_dir / "managers" / "abox.bag"),
        "-q", str(tmp_path / "q.cq"), "--via", "both",
    )
    assert code == 0 and out == "EMPTY\n"


def test_threads_flag_is_accepted(capsys, fixtures_dir):
    code, out, _ = run(
        capsys, "--threads", "4", "answer",
        "-T", str(fixtures_dir / "employees" / "tbox.dl"),
        "-A", str(fixtures_dir / "employees" / "abox.bag"),
        "-q", str(fixtures_dir / "employees" / "query.cq"),
    )
    assert code == 0 and out == "(Lee) 3\n"
