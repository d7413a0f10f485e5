import numpy as np
import pytest

from qldpcdec import gf2
from qldpcdec.codes import (
    BUILTIN_NAMES,
    CodeValidationError,
    CssCode,
    ManifestError,
    build_bicycle,
    build_builtin,
    build_hgp,
    build_surface,
    default_eta,
    dumps_code,
    load_code,
    loads_code,
    repetition_chain,
    save_code,
)
from qldpcdec.gf2 import SparseBitMatrix


def css_commutes(code):
    prod = (code.H_x.to_dense().astype(int) @ code.H_z.to_dense().astype(int).T) % 2
    return not prod.any()


class TestSurface:
    @pytest.mark.parametrize("d,n", [(3, 13), (5, 41), (7, 85)])
    def test_parameters(self, d, n):
        code = build_surface(d)
        assert (code.n, code.k, code.d) == (n, 1, d)
        assert code.t == (d - 1) // 2

    @pytest.mark.parametrize("d", [2, 4, 1, -3])
    def test_bad_distance_rejected(self, d):
        with pytest.raises(CodeValidationError):
            build_surface(d)


class TestHgp:
    def test_repetition_3_is_d3_surface(self):
        code = build_hgp(repetition_chain(3), name="rep3")
        surf = build_surface(3)
        assert (code.n, code.k) == (13, 1)
        assert code.H_x == surf.H_x and code.H_z == surf.H_z

    def test_degenerate_1x1_seed(self):
        code = build_hgp([[1]])
        assert (code.n, code.k) == (2, 0)

    def test_empty_seed_rejected(self):
        with pytest.raises(CodeValidationError):
            build_hgp(np.zeros((0, 3), dtype=np.uint8))

    def test_random_seeds_give_valid_codes(self):
        # CssCode.__post_init__ re-derives k by rank, so construction passing
        # means the rank formula held; commutation checked on top.
        rng = np.random.default_rng(17)
        for _ in range(100):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 9))
            seed = SparseBitMatrix.from_dense(rng.integers(0, 2, size=(m, n)))
            code = build_hgp(seed)
            assert code.n == n * n + m * m
            assert css_commutes(code)


class TestBicycle:
    def test_gross_parameters(self):
        code = build_bicycle(12, 6, [(3, 0), (0, 1), (0, 2)], [(0, 3), (1, 0), (2, 0)],
                             name="gross", distance=12)
        assert (code.n, code.k, code.d) == (144, 12, 12)

    def test_gb48_parameters(self):
        code = build_builtin("gb-48")
        assert (code.n, code.k, code.d) == (48, 6, 8)

    def test_toy_rank_oracle(self):
        code = build_bicycle(2, 1, [(0, 0), (1, 0)], [(0, 0), (1, 0)])
        hx = code.H_x.to_dense()
        hz = code.H_z.to_dense()
        k_oracle = 4 - gf2.rank(SparseBitMatrix.from_dense(hx)) - gf2.rank(
            SparseBitMatrix.from_dense(hz))
        assert code.n == 4 and code.k == k_oracle

    def test_duplicate_term_rejected(self):
        with pytest.raises(CodeValidationError, match="duplicate"):
            build_bicycle(12, 6, [(3, 0), (15, 0)], [(0, 3), (1, 0)])

    def test_blocks_commute(self):
        # rebuild the blocks and check A@B = B@A explicitly
        l, m = 12, 6
        def block(terms):
            size = l * m
            M = np.zeros((size, size), dtype=np.uint8)
            for (i, j) in terms:
                for r in range(size):
                    rl, rm = divmod(r, m)
                    M[r, ((rl + i) % l) * m + (rm + j) % m] ^= 1
            return M
        A = block([(3, 0), (0, 1), (0, 2)])
        B = block([(0, 3), (1, 0), (2, 0)])
        assert not ((A.astype(int) @ B - B.astype(int) @ A) % 2).any()


class TestShippedInvariants:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_all_invariants(self, name):
        code = build_builtin(name)
        assert css_commutes(code)
        k_rank = code.n - gf2.rank(code.H_x) - gf2.rank(code.H_z)
        assert code.k == k_rank
        assert code.xi == int(code.H_x.to_dense().sum(axis=0).max())
        assert code.xi_x == int(code.H_z.to_dense().sum(axis=0).max())

    def test_default_eta(self):
        assert default_eta(build_builtin("gb-48")) == 48
        assert default_eta(build_builtin("gross")) == 35
        assert default_eta(build_builtin("surface-d7")) == 8
        assert default_eta(build_builtin("hgp-145")) == 6
        assert default_eta(build_builtin("surface-d3")) == 13


class TestManifest:
    def test_round_trip(self, tmp_path):
        code = build_surface(3)
        path = tmp_path / "d3.code"
        save_code(code, path)
        loaded = load_code(path)
        assert loaded.H_x == code.H_x and loaded.H_z == code.H_z
        assert (loaded.name, loaded.n, loaded.k, loaded.d) == ("surface-d3", 13, 1, 3)

    def test_commutation_violation_detected(self):
        code = build_surface(3)
        text = dumps_code(code)
        lines = text.splitlines()
        # flip one bit of the first Hx row
        hx_start = 2
        first = lines[hx_start].split()
        lines[hx_start] = " ".join(first[:-1] + [str((int(first[-1]) + 1) % 13)])
        with pytest.raises(ManifestError, match="CSS commutation violated"):
            loads_code("\n".join(lines) + "\n")

    def test_declared_k_mismatch_detected(self):
        code = build_surface(3)
        text = dumps_code(code).splitlines()
        head = text[0].split()
        head[2] = "3"
        text[0] = " ".join(head)
        with pytest.raises(ManifestError, match="k=3 inconsistent"):
            loads_code("\n".join(text) + "\n")

    def test_malformed_header(self):
        with pytest.raises(ManifestError):
            loads_code("just-a-name 13 1\nHx 1 1\n0\nHz 1 1\n0\n")

    def test_truncated_matrix(self):
        code = build_surface(3)
        text = dumps_code(code).splitlines()
        with pytest.raises(ManifestError):
            loads_code("\n".join(text[:5]) + "\n")


class TestDataDirOverride:
    def test_corrupt_data_file_rejected(self, tmp_path, monkeypatch):
        import json
        spec = json.loads((build_data_path() / "gb_48.json").read_text())
        spec["k"] = 7
        (tmp_path / "gb_48.json").write_text(json.dumps(spec))
        monkeypatch.setenv("QLDPC_DATA_DIR", str(tmp_path))
        with pytest.raises(CodeValidationError, match="construction gives"):
            build_builtin("gb-48")


def build_data_path():
    from qldpcdec.codes import data_dir
    return data_dir()


def test_sector_constants():
    code = build_builtin("gb-48")
    z = code.z_sector()
    x = code.x_sector()
    assert z.t == x.t == 3
    assert z.xi == code.xi == 4
    assert x.xi == code.xi_x == 4
    e = np.zeros(48, dtype=np.uint8)
    e[5] = 1
    assert z.syndrome(e).sum() == 4
