import json

import numpy as np
import pytest

from lapchol import Config, Variant, sparse_cholesky
from lapchol import io as lio
from lapchol import oracle
from lapchol.cli import main
from lapchol.graphgen import random_connected_graph

from helpers import factorizations_equal

P3 = "1 2 1.0\n2 3 1.0\n"


@pytest.fixture
def p3_file(tmp_path):
    p = tmp_path / "p3.el"
    p.write_text(P3)
    return p


class TestEdgelist:
    def test_parse_p3(self, p3_file):
        g = lio.parse_edgelist(p3_file)
        assert np.array_equal(g.reconstruct_dense(),
                              [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    def test_comments_and_blank_lines(self, tmp_path):
        p = tmp_path / "g.el"
        p.write_text("# a comment\n\n1 2 2.5  # trailing\n")
        g = lio.parse_edgelist(p)
        assert g.live_edge_total == 1 and g.n == 2

    def test_self_loop_reports_line(self, tmp_path):
        p = tmp_path / "bad.el"
        p.write_text("1 2 1.0\n1 1 2.0\n")
        with pytest.raises(lio.GraphFormatError, match=":2"):
            lio.parse_edgelist(p)

    def test_nonpositive_weight(self, tmp_path):
        p = tmp_path / "bad.el"
        p.write_text("1 2 0.0\n")
        with pytest.raises(lio.GraphFormatError):
            lio.parse_edgelist(p)

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "bad.el"
        p.write_text("1 2\n")
        with pytest.raises(lio.GraphFormatError, match=":1"):
            lio.parse_edgelist(p)

    def test_roundtrip_dense_equal(self, tmp_path):
        g = random_connected_graph(9, seed=3)
        out = tmp_path / "echo.el"
        lio.emit_edgelist(g, out)
        h = lio.parse_edgelist(out)
        assert np.array_equal(g.reconstruct_dense(), h.reconstruct_dense())


class TestMatrixMarket:
    def test_p3_roundtrip(self, tmp_path):
        p = tmp_path / "p3.mtx"
        p.write_text(
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "3 3 5\n"
            "1 1 1.0\n2 2 2.0\n3 3 1.0\n2 1 -1.0\n3 2 -1.0\n")
        g = lio.parse_matrix_market(p)
        assert np.array_equal(g.reconstruct_dense(),
                              [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    def test_duplicates_become_multi_edges(self, tmp_path):
        p = tmp_path / "dup.mtx"
        p.write_text(
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "2 2 4\n"
            "1 1 5.0\n2 2 5.0\n2 1 -2.0\n2 1 -3.0\n")
        g = lio.parse_matrix_market(p)
        assert g.live_edge_total == 2
        assert g.reconstruct_dense()[0, 1] == -5.0

    def test_general_header_rejected(self, tmp_path):
        p = tmp_path / "gen.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real general\n"
                     "2 2 2\n1 1 1.0\n2 2 1.0\n")
        with pytest.raises(lio.GraphFormatError, match="asymmetric"):
            lio.parse_matrix_market(p)

    def test_row_sum_violation(self, tmp_path):
        p = tmp_path / "bad.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                     "2 2 3\n1 1 9.0\n2 2 1.0\n2 1 -1.0\n")
        with pytest.raises(lio.GraphFormatError, match="row sums"):
            lio.parse_matrix_market(p)

    def test_positive_offdiag_rejected(self, tmp_path):
        p = tmp_path / "bad.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                     "2 2 3\n1 1 -1.0\n2 2 -1.0\n2 1 1.0\n")
        with pytest.raises(lio.GraphFormatError, match="positive off-diagonal"):
            lio.parse_matrix_market(p)

    def test_entry_count_mismatch(self, tmp_path):
        p = tmp_path / "bad.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                     "2 2 5\n1 1 1.0\n2 2 1.0\n2 1 -1.0\n")
        with pytest.raises(lio.GraphFormatError, match="entry count"):
            lio.parse_matrix_market(p)

    def test_diagonal_only_rejected(self, tmp_path):
        p = tmp_path / "diag.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                     "2 2 2\n1 1 0.0\n2 2 0.0\n")
        with pytest.raises(lio.GraphFormatError, match="no off-diagonal"):
            lio.parse_matrix_market(p)


class TestVectors:
    def test_roundtrip(self, tmp_path):
        x = np.array([1.5, -2.25, 0.75])
        p = tmp_path / "v.txt"
        lio.write_vector(x, p)
        assert np.array_equal(lio.read_vector(p), x)


class TestSerialization:
    def test_roundtrip_bitwise(self, tmp_path):
        g = random_connected_graph(10, seed=1)
        f = sparse_cholesky(g, Config(rho_override=6, seed=4))
        p = tmp_path / "f.lcho"
        lio.serialize_factorization(f, p)
        h = lio.deserialize_factorization(p)
        assert factorizations_equal(f, h)
        # a second write of the deserialized object is byte-identical
        q = tmp_path / "g.lcho"
        lio.serialize_factorization(h, q)
        assert p.read_bytes() == q.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.lcho"
        p.write_bytes(b"NOPE" + bytes(64))
        with pytest.raises(lio.FactorizationFormatError, match="magic"):
            lio.deserialize_factorization(p)

    def test_unsupported_version(self, tmp_path):
        g = random_connected_graph(5, seed=0)
        f = sparse_cholesky(g, Config(rho_override=2))
        p = tmp_path / "f.lcho"
        lio.serialize_factorization(f, p)
        data = bytearray(p.read_bytes())
        data[4] = 2
        p.write_bytes(bytes(data))
        with pytest.raises(lio.FactorizationFormatError, match="version 2"):
            lio.deserialize_factorization(p)

    def test_truncated(self, tmp_path):
        g = random_connected_graph(5, seed=0)
        f = sparse_cholesky(g, Config(rho_override=2))
        p = tmp_path / "f.lcho"
        lio.serialize_factorization(f, p)
        p.write_bytes(p.read_bytes()[:-9])
        with pytest.raises(lio.FactorizationFormatError, match="truncated"):
            lio.deserialize_factorization(p)

    def test_stats_fill_equals_deserialized_nnz(self, tmp_path):
        g = random_connected_graph(8, seed=2)
        f = sparse_cholesky(g, Config(rho_override=4, seed=1))
        p = tmp_path / "f.lcho"
        lio.serialize_factorization(f, p)
        h = lio.deserialize_factorization(p)
        assert f.stats.fill == h.nnz


class TestCliFactorize:
    def test_exact_p3_fill(self, p3_file, tmp_path, capsys):
        stats = tmp_path / "s.json"
        rc = main(["factorize", "--input", str(p3_file), "--variant", "exact",
                   "--out", str(tmp_path / "f.lcho"), "--stats", str(stats)])
        assert rc == 0
        assert json.loads(stats.read_text())["fill"] == 5

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["factorize", "--input", str(tmp_path / "nope.el")]) == 2

    def test_disconnected_exit_3(self, tmp_path):
        p = tmp_path / "two.el"
        p.write_text("1 2 1.0\n3 4 1.0\n")
        assert main(["factorize", "--input", str(p)]) == 3

    def test_stats_schema_and_trajectory(self, p3_file, tmp_path):
        stats = tmp_path / "s.json"
        rc = main(["factorize", "--input", str(p3_file), "--rho", "4",
                   "--stats", str(stats)])
        assert rc == 0
        d = json.loads(stats.read_text())
        assert d["schema"] == 1
        traj = d["live_edge_trajectory"]["live_edges"]
        assert all(a >= b for a, b in zip(traj, traj[1:]))
        assert d["fill"] <= d["rho"] * d["m"] + d["n"]

    def test_determinism_byte_for_byte(self, tmp_path):
        g = random_connected_graph(12, seed=6)
        graph_file = tmp_path / "g.el"
        lio.emit_edgelist(g, graph_file)
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"f_{tag}.lcho"
            rc = main(["factorize", "--input", str(graph_file),
                       "--rho", "8", "--seed", "42", "--out", str(out)])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestCliSolve:
    def _setup(self, tmp_path, rhs_vals, variant="exact"):
        p = tmp_path / "p3.el"
        p.write_text(P3)
        fact = tmp_path / "f.lcho"
        assert main(["factorize", "--input", str(p), "--variant", variant,
                     "--out", str(fact)]) == 0
        rhs = tmp_path / "b.txt"
        lio.write_vector(np.array(rhs_vals), rhs)
        return p, fact, rhs

    def test_solve_p3(self, tmp_path):
        p, fact, rhs = self._setup(tmp_path, [1.0, 0.0, -1.0])
        out = tmp_path / "x.txt"
        rep = tmp_path / "r.json"
        rc = main(["solve", "--factorization", str(fact), "--input", str(p),
                   "--rhs", str(rhs), "--eps-solve", "1e-9",
                   "--out", str(out), "--report", str(rep)])
        assert rc == 0
        x = lio.read_vector(out)
        g = lio.parse_edgelist(p)
        L = g.reconstruct_dense()
        assert np.linalg.norm(L @ x - np.array([1.0, 0.0, -1.0])) <= 1e-8
        assert json.loads(rep.read_text())["converged"]

    def test_all_ones_rejected_exit_4(self, tmp_path):
        p, fact, rhs = self._setup(tmp_path, [1.0, 1.0, 1.0])
        assert main(["solve", "--factorization", str(fact), "--input", str(p),
                     "--rhs", str(rhs)]) == 4

    def test_all_ones_with_projection_ok(self, tmp_path):
        p, fact, rhs = self._setup(tmp_path, [1.0, 1.0, 1.0])
        out = tmp_path / "x.txt"
        rc = main(["solve", "--factorization", str(fact), "--input", str(p),
                   "--rhs", str(rhs), "--project-rhs", "--out", str(out)])
        assert rc == 0
        assert np.abs(lio.read_vector(out)).max() <= 1e-12

    def test_zero_rhs_zero_iterations(self, tmp_path):
        p, fact, rhs = self._setup(tmp_path, [0.0, 0.0, 0.0])
        rep = tmp_path / "r.json"
        rc = main(["solve", "--factorization", str(fact), "--input", str(p),
                   "--rhs", str(rhs), "--report", str(rep)])
        assert rc == 0
        assert json.loads(rep.read_text())["iterations"] == 0

    def test_dimension_mismatch_exit_2(self, tmp_path):
        p, fact, rhs = self._setup(tmp_path, [1.0, 0.0, 0.0, -1.0])
        assert main(["solve", "--factorization", str(fact), "--input", str(p),
                     "--rhs", str(rhs)]) == 2

    def test_corrupt_factorization_exit_2(self, tmp_path):
        p, fact, rhs = self._setup(tmp_path, [1.0, 0.0, -1.0])
        bad = tmp_path / "bad.lcho"
        bad.write_bytes(b"XXXX" + fact.read_bytes()[4:])
        assert main(["solve", "--factorization", str(bad), "--input", str(p),
                     "--rhs", str(rhs)]) == 2


class TestCliCheck:
    def test_exact_passes(self, p3_file, capsys):
        rc = main(["check", "--input", str(p3_file), "--variant", "exact"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "spectral-approximation: PASS" in out

    def test_sampled_default_rho_passes(self, tmp_path, capsys):
        g = random_connected_graph(16, seed=8, w_low=0.5, w_high=2.0)
        p = tmp_path / "g.el"
        lio.emit_edgelist(g, p)
        rc = main(["check", "--input", str(p), "--seed", "0"])
        assert rc == 0

    def test_absurdly_low_rho_fails(self, tmp_path, capsys):
        # rho=1 documents the phase behavior: the eps band is lost
        g = random_connected_graph(24, seed=9)
        p = tmp_path / "g.el"
        lio.emit_edgelist(g, p)
        rc = main(["check", "--input", str(p), "--rho", "1", "--seed", "0"])
        out = capsys.readouterr().out
        assert rc == 1
        assert "spectral-approximation: FAIL" in out

    def test_trace_prints_rows(self, p3_file, capsys):
        rc = main(["check", "--input", str(p3_file), "--variant", "exact",
                   "--trace"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "lambda_min" in out


class TestCliBench:
    def test_bench_both_backends_agree(self, capsys):
        rc = main(["bench", "--gen", "regular", "--n", "256", "--deg", "4",
                   "--rho", "4", "--backend", "both"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "backends bitwise identical: True" in out

    def test_bench_reports_counters(self, capsys):
        rc = main(["bench", "--gen", "er", "--n", "64", "--p", "0.1",
                   "--rho", "8"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "attempts=" in out and "edges_touched=" in out
