import csv
import json
import math

import pytest

from src.algorithms.bounds import (
    bb_bound,
    bisz2_bound,
    det_bound,
    nvar_coeff_bound,
    real_axis_bound,
    szasz_improved,
    szasz_original,
)
from src.algorithms.stability import generate_stable_product
from src.core.poly_core import MultiPoly
from src.utils.utils import DimensionError, HypothesisError
from src.verify import (
    COLUNAS_CSV,
    ESPERADO_VALIDO,
    ESPERADO_VIOLACAO,
    TipoLema,
    VerifyReport,
    bisz2_counterexample,
    compare_bounds,
    lemma_trials,
    log_sides,
    sharpness_run,
    squares_equality_holds,
    squares_sides,
    validity_sweep,
    verify_bound,
    write_csv,
    write_json,
)


# ----------------------------------------------------------------------
# verify_bound
# ----------------------------------------------------------------------

def test_constante_com_certificado_trivial():
    p = MultiPoly.constant(1)
    relatorio = verify_bound(p, szasz_improved(p), samples=500)
    assert relatorio.violations == 0
    assert relatorio.worst_log_margin == 0.0
    assert relatorio.witness is None


def test_det_no_produto_do_bidisco(produto_bidisco):
    relatorio = verify_bound(produto_bidisco, det_bound(produto_bidisco), radius=2.0, samples=10000, seed=3)
    assert relatorio.passed
    assert relatorio.trials == 10000
    assert relatorio.worst_log_margin >= -1e-9


def test_controlo_negativo_instavel():
    p = MultiPoly.from_coeffs_1d([1, 0, 1])
    b = szasz_improved(p)
    assert b.quad == pytest.approx(-1.0)
    relatorio = verify_bound(p, b, radius=3.0, samples=10000)
    assert relatorio.trials == 10000
    assert relatorio.violations > 0
    assert relatorio.witness is not None
    assert relatorio.witness['modulo_p'] > relatorio.witness['limite']
    assert relatorio.witness_z() != ''


def test_contraexemplo_de_bisz2_e_reportado(z1z2):
    relatorio = verify_bound(z1z2, bisz2_bound(z1z2), radius=1.2, samples=2000, seed=0, case_id='z1z2')
    assert relatorio.violations > 0
    assert not relatorio.passed
    assert not relatorio.accepted
    assert relatorio.worst_log_margin < -0.5
    assert all(z.real < 0 for z in relatorio.witness['z'])
    assert relatorio.witness['modulo_p'] > relatorio.witness['limite']


def test_relatorio_deterministico(produto_bidisco):
    b = bb_bound(produto_bidisco)
    a = verify_bound(produto_bidisco, b, samples=300, seed=9, case_id='x')
    c = verify_bound(produto_bidisco, b, samples=300, seed=9, case_id='x')
    assert a.para_linha() == c.para_linha()


def test_aridades_diferentes(produto_bidisco, um_mais_z):
    with pytest.raises(DimensionError):
        verify_bound(produto_bidisco, szasz_improved(um_mais_z))


def test_certificado_real_exige_pontos_reais(produto_bidisco):
    b = real_axis_bound(produto_bidisco)
    with pytest.raises(HypothesisError):
        verify_bound(produto_bidisco, b)
    assert verify_bound(produto_bidisco, b, real_only=True, samples=500).passed


# ----------------------------------------------------------------------
# Nitidez
# ----------------------------------------------------------------------

def test_nitidez_em_n_100():
    linha = sharpness_run(0.0, -1.0, [100], [1.0])[0]
    assert linha.modulo == pytest.approx(1.01 ** 100)
    assert linha.alvo == pytest.approx(math.e)
    assert abs(linha.razao - 1.01 ** 100 / math.e) <= 1e-6
    assert linha.razao == pytest.approx(0.9951, abs=1e-4)


def test_nitidez_em_n_1000():
    assert sharpness_run(0.0, -1.0, [1000], [1.0])[0].razao > 0.9995


def test_nitidez_em_y_nulo():
    for linha in sharpness_run(0.5, -1.0, [10, 100, 1000], [0.0]):
        assert linha.razao == 1.0


def test_nitidez_monotona_em_n():
    razoes = [linha.razao for linha in sharpness_run(0.0, -1.0, [10, 100, 1000], [1.0])]
    assert razoes[0] < razoes[1] < razoes[2] <= 1.0 + 1e-12


def test_nitidez_gamma_nao_positivo():
    with pytest.raises(HypothesisError):
        sharpness_run(0.0, 1.0, [10], [1.0])


# ----------------------------------------------------------------------
# Lemas
# ----------------------------------------------------------------------

@pytest.mark.parametrize("which", list(TipoLema))
def test_lemas_sem_violacoes(which):
    relatorio = lemma_trials(which, trials=300, seed=1)
    assert relatorio.trials == 300
    assert relatorio.violations == 0, str(relatorio)


def test_lema_quadrados_com_im_positiva_falha():
    relatorio = lemma_trials(TipoLema.SQUARES, trials=200, seed=0, positive_imag=True)
    assert relatorio.violations > 0
    assert relatorio.witness is not None


def test_lema_aceita_nome_textual():
    assert lemma_trials("log", trials=10).theorem == "log"


def test_quadrados_exemplo():
    esquerdo, direito = squares_sides([-1j, -1j])
    assert esquerdo == pytest.approx(2.0)
    assert direito == pytest.approx(6.0)
    assert not squares_equality_holds([-1j, -1j])


def test_quadrados_igualdade_com_alfas_reais(rng):
    for _ in range(20):
        alfas = rng.standard_normal(int(rng.integers(2, 9)))
        esquerdo, direito = squares_sides(alfas)
        assert abs(direito - esquerdo) <= 1e-12 * max(1.0, direito)
        assert squares_equality_holds(alfas)


def test_quadrados_igualdade_com_um_alfa_nao_real():
    esquerdo, direito = squares_sides([1, -1j])
    assert esquerdo == pytest.approx(direito)
    assert squares_equality_holds([1, -1j])


def test_log_em_zero():
    assert log_sides(0) == (0.0, 0.0)


def test_lema_sem_ensaios():
    with pytest.raises(DimensionError):
        lemma_trials(TipoLema.LOG, trials=0)


# ----------------------------------------------------------------------
# Comparação
# ----------------------------------------------------------------------

def test_melhorado_sempre_mais_justo(rng):
    p = generate_stable_product(1, 4, 2)
    Z = rng.uniform(-2, 2, (200, 1)) + 1j * rng.uniform(0, 2, (200, 1))
    tabela = compare_bounds(p, [szasz_original(p), szasz_improved(p)], Z)
    assert tabela.mais_justo['improved'] == 200
    assert tabela.obter_resumo()['fracao_mais_justo']['improved'] == 1.0


def test_constante_da_os_prefatores():
    p = MultiPoly.constant(1)
    bb, coeffn = bb_bound(p), nvar_coeff_bound(p)
    tabela = compare_bounds(p, [bb, coeffn], [[1j], [2 - 1j]])
    for linha in tabela.linhas:
        assert linha['log_p'] == 0.0
        assert linha['bb'] == pytest.approx(bb.log_prefactor)
        assert linha['coeffn'] == pytest.approx(0.5)


def test_det_muito_abaixo_de_bb(produto_bidisco):
    tabela = compare_bounds(produto_bidisco, [det_bound(produto_bidisco), bb_bound(produto_bidisco)], [[1j, 1j]])
    linha = tabela.linhas[0]
    assert linha['det'] == pytest.approx(1.0)
    assert linha['bb'] - linha['det'] > 200
    assert tabela.mais_justo == {'det': 1, 'bb': 0}


# ----------------------------------------------------------------------
# Varrimento e relatórios
# ----------------------------------------------------------------------

def test_varrimento_pequeno_sem_violacoes_inesperadas():
    relatorios = validity_sweep(arities=(1, 2, 3), polys=2, samples=50, seed=0)
    assert relatorios
    assert len({r.case_id for r in relatorios}) == len(relatorios)
    falhados = [str(r) for r in relatorios if not r.accepted]
    assert falhados == []
    for r in relatorios:
        if not r.passed:
            assert r.expected == ESPERADO_VIOLACAO
            assert r.theorem in ('bisz2', 'msz2')


def test_varrimento_duas_variaveis_tem_todos_os_teoremas():
    relatorios = validity_sweep(arities=(2,), polys=1, samples=20, seed=5)
    casos = {r.case_id: r for r in relatorios}
    assert 'n2-produto-det' in casos
    assert 'n2-detrep-bisz2' in casos
    assert 'n2-anulamento-msz2' in casos
    assert 'n2-nucleo-bisz2' in casos
    assert casos['n2-produto-det'].expected == ESPERADO_VALIDO
    assert casos['n2-detrep-bisz2'].expected == ESPERADO_VALIDO
    assert casos['n2-anulamento-bisz2'].expected == ESPERADO_VIOLACAO
    assert all(r.n == 2 for r in relatorios)


def test_varrimento_reporta_o_contraexemplo():
    relatorios = validity_sweep(arities=(2,), polys=1, samples=2000, seed=0, radius=1.2)
    caso = next(r for r in relatorios if r.case_id == 'n2-contraexemplo-bisz2')
    assert caso.violations > 0
    assert caso.expected == ESPERADO_VIOLACAO
    assert caso.accepted
    assert caso.para_linha()['expected'] == 'known-violation'
    assert caso.witness_z() != ''


@pytest.mark.parametrize("n", [2, 3])
def test_varrimento_cobre_representacoes_com_nucleo(n):
    relatorios = validity_sweep(arities=(n,), polys=2, samples=30, seed=1, detrep_size=3)
    nucleo = {r.theorem: r for r in relatorios if '-nucleo-' in r.case_id}
    assert set(nucleo) == {'bisz2', 'msz2'}
    for r in nucleo.values():
        assert r.trials == 60
        assert r.expected == ESPERADO_VIOLACAO


def test_varrimento_sem_nucleo_com_matrizes_1x1():
    relatorios = validity_sweep(arities=(2,), polys=1, samples=10, detrep_size=1)
    assert not any('-nucleo-' in r.case_id for r in relatorios)


def test_contraexemplo_e_z1z2(z1z2):
    assert bisz2_counterexample() == z1z2


def test_varrimento_aridade_invalida():
    with pytest.raises(DimensionError):
        validity_sweep(arities=(4,), polys=1, samples=10)


def test_escrita_csv(tmp_path, produto_bidisco):
    relatorio = verify_bound(produto_bidisco, det_bound(produto_bidisco), samples=100, case_id='caso')
    caminho = tmp_path / "r.csv"
    write_csv([relatorio], str(caminho), config={'seed': 0})
    linhas = caminho.read_text(encoding='utf-8').splitlines()
    assert linhas[0].startswith('# config:')
    leitor = list(csv.DictReader(linhas[1:]))
    assert list(leitor[0].keys()) == COLUNAS_CSV
    assert leitor[0]['case_id'] == 'caso'
    assert leitor[0]['violations'] == '0'


def test_escrita_json_com_margem_infinita(tmp_path):
    caminho = tmp_path / "r.json"
    write_json([VerifyReport(case_id='vazio')], str(caminho))
    dados = json.loads(caminho.read_text(encoding='utf-8'))
    assert dados['config'] == {}
    assert dados['reports'][0]['worst_margin'] == 'inf'
    assert dados['reports'][0]['case_id'] == 'vazio'
