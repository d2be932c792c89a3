#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试 mf_solver 命令行
各子命令的输出文件与退出码
"""

import json
import sys

import numpy as np
import pandas as pd
import pytest

from builder import fixture_path
from config import TOLERANCES, get_default_tolerances, tolerance_overrides
from errors import UsageError
from mf_solver import eigen_table, main, split_generators
from operators import PAULI, identity, number, parse_polynomial, pauli


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return str(path)


@pytest.fixture
def diagonal_file(tmp_path):
    return _write(tmp_path, "diagonal.txt", "# 对角哈密顿量\n0.3 : 1^ 1\n1.1 : 2^ 2\n")


def test_parse_writes_header_and_canonical_text(tmp_path):
    source = _write(tmp_path, "h.txt", "1.0 : 1 2^\n")
    out = tmp_path / "out.txt"
    assert main(['parse', source, '--out', str(out)]) == 0
    text = out.read_text(encoding='utf-8')
    assert text.startswith("# tool: mf_solver")
    # 1 2^ = −2^ 1
    assert parse_polynomial(text) == parse_polynomial("-1 : 2^ 1")


def test_parse_to_stdout(tmp_path, capsys):
    source = _write(tmp_path, "h.txt", "2 : z1 x2\n")
    assert main(['parse', source]) == 0
    output = capsys.readouterr().out
    assert "# terms: 1" in output
    assert parse_polynomial(output) == pauli('z', 1, 2) * pauli('x', 2, 2) * 2.0


def test_parse_error_exit_code(tmp_path, capsys):
    source = _write(tmp_path, "bad.txt", "1.0 : 1^ 1\n1.0 1^ 2\n")
    assert main(['parse', source]) == 2
    assert "第 2 行" in capsys.readouterr().err


def test_missing_input_file(tmp_path):
    assert main(['parse', str(tmp_path / "missing.txt")]) == 1


def test_no_command_and_bad_arguments():
    assert main([]) == 1
    assert main(['parse']) == 1


def test_generate_from_spec(tmp_path):
    out = tmp_path / "class2.txt"
    assert main(['generate', fixture_path("qmf_class2.json"), '--out', str(out)]) == 0
    text = out.read_text(encoding='utf-8')
    assert "# class: 2" in text
    assert "# spec_sha256: " in text
    with open(fixture_path("qmf_class2.txt"), encoding='utf-8') as handle:
        expected = parse_polynomial(handle.read(), PAULI, 2)
    assert parse_polynomial(text, PAULI, 2).allclose(expected, 1e-10)


def test_generate_random_is_reproducible(tmp_path):
    first, second = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ['generate', '--random', '2', '--family', 'pauli', '--modes', '2', '--seed', '3']
    assert main(args + ['--out', str(first)]) == 0
    assert main(args + ['--out', str(second)]) == 0
    assert first.read_text(encoding='utf-8') == second.read_text(encoding='utf-8')
    assert "# class: 2" in first.read_text(encoding='utf-8')


def test_generate_argument_errors(tmp_path):
    assert main(['generate']) == 1
    assert main(['generate', '--random', '1']) == 1
    bad = _write(tmp_path, "bad.json", "{not json")
    assert main(['generate', bad]) == 1


def test_classify_report(tmp_path, diagonal_file):
    out = tmp_path / "report.json"
    assert main(['classify', diagonal_file, '--budget', '2', '--out', str(out)]) == 0
    report = json.loads(out.read_text(encoding='utf-8'))
    assert report['verdict'] == 'class'
    assert report['summary'] == 'class(1)'
    assert report['provenance']['budget'] == 2
    assert len(report['provenance']['input_sha256']) == 64


def test_classify_inconclusive_exit_code(tmp_path, capsys):
    """负的方差容差使优化永远不收敛，而单比特本征态都是乘积态"""
    source = _write(tmp_path, "qubit.txt", "1 : z1\n0.5 : x1\n")
    out = tmp_path / "report.json"
    assert main(['classify', source, '--budget', '1', '--tol-variance=-1', '--out', str(out)]) == 5
    assert json.loads(out.read_text(encoding='utf-8'))['verdict'] == 'inconclusive'
    assert "结论不确定" in capsys.readouterr().err


def test_classify_config_override(tmp_path, diagonal_file):
    config = _write(tmp_path, "config.json", json.dumps({'optimizer': {'seed_restarts': 1}}))
    assert main(['classify', diagonal_file, '--config', config, '--budget', '1']) == 0
    unknown = _write(tmp_path, "unknown.json", json.dumps({'tolerances': {'nothing': 1.0}}))
    assert main(['classify', diagonal_file, '--config', unknown]) == 1


def test_config_tolerances_reach_library(tmp_path, diagonal_file):
    """--config 中的容差在运行期间对各模块生效，结束后恢复默认值"""
    capped = _write(tmp_path, "cap.json", json.dumps({'tolerances': {'oracle_mode_cap': 1}}))
    assert main(['solve', diagonal_file, '--config', capped]) == 4
    assert TOLERANCES['oracle_mode_cap'] == get_default_tolerances()['oracle_mode_cap']

    loose = _write(tmp_path, "loose.json", json.dumps({'tolerances': {'degeneracy': 1.0}}))
    out = tmp_path / "eigen.csv"
    assert main(['solve', diagonal_file, '--config', loose, '--out', str(out)]) == 0
    table = pd.read_csv(out, encoding='utf-8-sig')
    assert table['degeneracy'].tolist() == [4, 4, 4, 4]
    assert main(['solve', diagonal_file, '--out', str(out)]) == 0
    assert pd.read_csv(out, encoding='utf-8-sig')['degeneracy'].tolist() == [1, 1, 1, 1]


def test_tolerance_overrides_restore_and_reject_unknown():
    with tolerance_overrides({'degeneracy': 0.5}):
        assert TOLERANCES['degeneracy'] == 0.5
    assert TOLERANCES['degeneracy'] == get_default_tolerances()['degeneracy']
    with pytest.raises(UsageError):
        with tolerance_overrides({'nothing': 1.0}):
            pass


def test_solve_csv_and_xlsx(tmp_path, diagonal_file):
    csv_path = tmp_path / "eigen.csv"
    assert main(['solve', diagonal_file, '--out', str(csv_path)]) == 0
    table = pd.read_csv(csv_path, encoding='utf-8-sig')
    assert np.allclose(sorted(table['energy']), [0.0, 0.3, 1.1, 1.4])
    assert table['particle_number'].tolist() == [0, 1, 1, 2]

    xlsx_path = tmp_path / "eigen.xlsx"
    assert main(['solve', diagonal_file, '--out', str(xlsx_path)]) == 0
    sheet = pd.read_excel(xlsx_path, engine='openpyxl')
    assert len(sheet) == 4
    assert sheet['is_mf'].astype(bool).all()


def test_eigen_table_marks_degenerate_states():
    table = eigen_table(number(1, 2) + number(2, 2))
    assert table['degeneracy'].tolist() == [1, 2, 2, 1]
    assert table['is_mf'].isna().tolist() == [False, True, True, False]


def test_verify_generated_hamiltonian(tmp_path):
    spec = fixture_path("orbital_class2.json")
    hamiltonian = tmp_path / "h.txt"
    assert main(['generate', spec, '--out', str(hamiltonian)]) == 0
    result = tmp_path / "verify.json"
    assert main(['verify', str(hamiltonian), spec, '--out', str(result)]) == 0
    assert json.loads(result.read_text(encoding='utf-8'))['passed']


def test_verify_mismatch_exit_code(tmp_path):
    spec = fixture_path("orbital_class2.json")
    hamiltonian = tmp_path / "h.txt"
    assert main(['generate', spec, '--out', str(hamiltonian)]) == 0
    with open(hamiltonian, 'a', encoding='utf-8') as handle:
        handle.write("0.1 : 1^ 1\n")
    assert main(['verify', str(hamiltonian), spec]) == 3


def test_verify_against_classification_report(tmp_path, diagonal_file):
    report = tmp_path / "report.json"
    assert main(['classify', diagonal_file, '--budget', '2', '--out', str(report)]) == 0
    assert main(['verify', diagonal_file, str(report)]) == 0


def test_jordan_wigner_command(tmp_path):
    source = _write(tmp_path, "n.txt", "1 : 1^ 1\n")
    out = tmp_path / "jw.txt"
    assert main(['jw', source, '--out', str(out)]) == 0
    mapped = parse_polynomial(out.read_text(encoding='utf-8'), PAULI, 1)
    # n = (1 − z)/2
    assert mapped.allclose(identity(PAULI, 1) * 0.5 - pauli('z', 1, 1) * 0.5, 1e-12)
    pauli_source = _write(tmp_path, "p.txt", "1 : z1\n")
    assert main(['jw', pauli_source]) == 1


def test_split_generators():
    text = "# 生成元\n1j : z1\n---\n\n---\n1j : x1\n"
    assert split_generators(text) == ["# 生成元\n1j : z1", "1j : x1"]


def test_closure_command(tmp_path):
    source = _write(tmp_path, "gens.txt", "1j : z1\n---\n1j : x1\n")
    out = tmp_path / "closure.json"
    assert main(['closure', source, '--out', str(out)]) == 0
    summary = json.loads(out.read_text(encoding='utf-8'))
    assert summary['dimension'] == 3
    assert summary['field'] == 'real-compact'


def test_closure_rejects_hermitian_generators(tmp_path):
    source = _write(tmp_path, "gens.txt", "1 : x1\n")
    assert main(['closure', source]) == 3
    empty = _write(tmp_path, "empty.txt", "# 空\n")
    assert main(['closure', empty]) == 1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
