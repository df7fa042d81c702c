import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.algorithms.stability import (
    EstadoEstabilidade,
    check_reflection,
    check_y_monotonicity,
    generate_stable_detrep,
    generate_stable_product,
    generate_vanishing_product,
    is_stable_1d,
    refute_stability,
    root_error_radius,
    roots_1d,
    sharpness_factors,
)
from src.core.detrep import check_detrep
from src.core.poly_core import MultiPoly, evaluate_many, homogeneous_parts, product
from src.utils.utils import DimensionError, HypothesisError


# ----------------------------------------------------------------------
# Raízes numa variável
# ----------------------------------------------------------------------

def test_raiz_de_um_mais_z(um_mais_z):
    assert_allclose(roots_1d(um_mais_z), [-1])


def test_raizes_de_um_mais_z_quadrado():
    raizes = roots_1d(MultiPoly.from_coeffs_1d([1, 0, 1]))
    assert_allclose(sorted(raizes, key=lambda r: r.imag), [-1j, 1j], atol=1e-12)


def test_raizes_de_produto_fatorizado():
    p = MultiPoly.from_coeffs_1d([1, 2]) * MultiPoly.from_coeffs_1d([1, -1j])
    raizes = sorted(roots_1d(p), key=lambda r: r.imag)
    assert_allclose(raizes, [-1j, -0.5], atol=1e-8)


@pytest.mark.parametrize("p", [MultiPoly(1), MultiPoly.constant(1, 3.0)])
def test_raizes_de_constante(p):
    with pytest.raises(HypothesisError):
        roots_1d(p)


def test_residuos_das_raizes(rng):
    for _ in range(50):
        grau = int(rng.integers(1, 11))
        coefs = rng.standard_normal(grau + 1) + 1j * rng.standard_normal(grau + 1)
        coefs[-1] += 1.0
        p = MultiPoly.from_coeffs_1d(coefs)
        maximo = p.max_abs_coefficient()
        for r in roots_1d(p):
            residuo = abs(np.polyval(coefs[::-1], r))
            assert residuo <= 1e-6 * (1 + maximo) * (1 + abs(r)) ** grau


# ----------------------------------------------------------------------
# Estabilidade numa variável
# ----------------------------------------------------------------------

def test_um_mais_z_e_estavel(um_mais_z):
    veredicto = is_stable_1d(um_mais_z)
    assert veredicto.status == EstadoEstabilidade.ESTAVEL
    assert_allclose(veredicto.roots, [-1])


def test_um_mais_z_quadrado_e_instavel():
    veredicto = is_stable_1d(MultiPoly.from_coeffs_1d([1, 0, 1]))
    assert veredicto.is_unstable
    assert veredicto.witness[0] == pytest.approx(1j)


def test_produto_com_alfas_no_semiplano_inferior(rng):
    alfas = rng.standard_normal(50) - 1j * np.abs(rng.standard_normal(50))
    p = product((MultiPoly.from_coeffs_1d([1, a]) for a in alfas), 1)
    assert is_stable_1d(p).is_stable


def test_raizes_agrupadas_de_grau_alto_nao_dao_instavel():
    rng = np.random.default_rng(12345)
    alfas = rng.uniform(1.0, 2.0, 50) - 1j * rng.uniform(0.2, 1.0, 50)
    p = product((MultiPoly.from_coeffs_1d([1, a]) for a in alfas), 1)
    veredicto = is_stable_1d(p)
    assert not veredicto.is_unstable
    assert len(veredicto.roots) == 50


def test_raio_de_erro_de_raiz_simples():
    p = MultiPoly.from_coeffs_1d([1, 0, 1])
    assert root_error_radius(p, 1j) < 1e-14
    assert root_error_radius(MultiPoly.from_coeffs_1d([0, 0, 1]), 0j) == math.inf


def test_constantes():
    assert is_stable_1d(MultiPoly.constant(1, 2.0)).is_stable
    assert is_stable_1d(MultiPoly(1)).is_unstable


def test_veredicto_uma_variavel_nunca_desconhecido(rng):
    for _ in range(20):
        p = MultiPoly.from_coeffs_1d(rng.standard_normal(4) + 1j * rng.standard_normal(4))
        assert is_stable_1d(p).status != EstadoEstabilidade.DESCONHECIDO


# ----------------------------------------------------------------------
# Geradores
# ----------------------------------------------------------------------

def test_produto_sem_fatores_e_um():
    assert generate_stable_product(3, 0, 1) == MultiPoly.constant(3)


@pytest.mark.parametrize("seed", range(5))
def test_produto_numa_variavel_e_estavel(seed):
    p = generate_stable_product(1, 4, seed)
    assert p.constant_term == pytest.approx(1)
    assert is_stable_1d(p).is_stable


def test_produto_e_deterministico():
    assert generate_stable_product(2, 3, 42) == generate_stable_product(2, 3, 42)


def test_produto_nao_refutado():
    p = generate_stable_product(2, 3, 5)
    assert refute_stability(p, 2.0, 10000, 0).status == EstadoEstabilidade.DESCONHECIDO


def test_anulamento_tem_a_ordem_pedida():
    p = generate_vanishing_product(2, 2, 2, 3)
    assert homogeneous_parts(p).vanishing_order == 2


def test_detrep_diagonal_de_tamanho_um():
    rep, p = generate_stable_detrep(1, 1, 0)
    assert p.total_degree == 1
    raiz = roots_1d(p)[0]
    assert raiz.imag <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_detrep_gerada_nao_refutada(seed):
    rep, p = generate_stable_detrep(2, 3, seed)
    assert check_detrep(rep).passed
    assert p.constant_term == pytest.approx(1, abs=1e-9)
    assert refute_stability(p, 2.0, 10000, seed).status == EstadoEstabilidade.DESCONHECIDO


def test_detrep_nao_se_anula_no_polidisco(rng):
    _, p = generate_stable_detrep(3, 3, 11)
    Z = rng.uniform(-2, 2, (1000, 3)) + 1j * rng.uniform(0.01, 2, (1000, 3))
    assert np.all(np.abs(evaluate_many(p, Z)) > 0)


def test_detrep_com_nucleo_anula_se_com_essa_ordem():
    rep, p = generate_stable_detrep(2, 3, 4, kernel_dim=1)
    assert np.linalg.matrix_rank(rep.A, tol=1e-8) == 2
    assert homogeneous_parts(p).vanishing_order == 1


def test_detrep_nucleo_fora_do_intervalo():
    with pytest.raises(DimensionError):
        generate_stable_detrep(2, 3, 0, kernel_dim=4)


# ----------------------------------------------------------------------
# Refutação
# ----------------------------------------------------------------------

def test_constante_nunca_refutada():
    veredicto = refute_stability(MultiPoly.constant(2), 2.0, 1000, 0)
    assert veredicto.status == EstadoEstabilidade.DESCONHECIDO


def test_um_mais_z1z2_refutado():
    p = MultiPoly(2, {(0, 0): 1, (1, 1): 1})
    veredicto = refute_stability(p, 2.0, 100000, 0)
    assert veredicto.is_unstable
    z = veredicto.witness
    assert min(v.imag for v in z) > 0
    assert abs(1 + z[0] * z[1]) < 1e-9


def test_refutacao_numa_variavel_usa_raizes():
    veredicto = refute_stability(MultiPoly.from_coeffs_1d([1, 0, 1]), 2.0, 10, 0)
    assert veredicto.is_unstable


def test_refutacao_numa_variavel_pode_ser_estavel():
    assert refute_stability(MultiPoly.constant(1), 2.0, 10, 0).is_stable
    assert refute_stability(MultiPoly.constant(2), 2.0, 10, 0).status == EstadoEstabilidade.DESCONHECIDO


# ----------------------------------------------------------------------
# Propriedades de reflexão e monotonia
# ----------------------------------------------------------------------

def test_reflexao_da_constante():
    assert check_reflection(MultiPoly.constant(1), [1j]) == (1.0, 1.0)


def test_reflexao_de_um_mais_z(um_mais_z):
    primeiro, maximo = check_reflection(um_mais_z, [1j])
    assert primeiro == pytest.approx(math.sqrt(2))
    assert maximo == pytest.approx(math.sqrt(2))


def test_reflexao_em_produtos_estaveis(rng):
    for k in range(200):
        n = int(rng.integers(1, 4))
        p = generate_stable_product(n, int(rng.integers(1, 5)), k)
        z = rng.uniform(-2, 2, n) + 1j * rng.uniform(0.01, 2, n)
        primeiro, maximo = check_reflection(p, z)
        assert primeiro >= maximo - 1e-10 * max(1.0, maximo)


def test_monotonia_com_y_iguais(um_mais_z):
    a, b = check_y_monotonicity(um_mais_z, [0.3], [1.0], [1.0])
    assert a == b


def test_monotonia_de_um_mais_z(um_mais_z):
    a, b = check_y_monotonicity(um_mais_z, [0.0], [1.0], [2.0])
    assert a == pytest.approx(math.sqrt(2))
    assert b == pytest.approx(math.sqrt(5))


def test_monotonia_em_produtos_estaveis(rng):
    for k in range(200):
        n = int(rng.integers(1, 4))
        p = generate_stable_product(n, int(rng.integers(1, 5)), 1000 + k)
        x = rng.uniform(-2, 2, n)
        y = rng.uniform(0, 1, n)
        y_til = y + rng.uniform(0, 1, n)
        a, b = check_y_monotonicity(p, x, y, y_til)
        assert a <= b + 1e-10 * max(1.0, b)


def test_monotonia_exige_ordem(um_mais_z):
    with pytest.raises(HypothesisError):
        check_y_monotonicity(um_mais_z, [0.0], [2.0], [1.0])


# ----------------------------------------------------------------------
# Família de nitidez
# ----------------------------------------------------------------------

@pytest.mark.parametrize("n", [10, 100])
def test_fatores_de_nitidez_estaveis(n):
    linear, quadratico, multiplicidade = sharpness_factors(1.0, -1.0, n)
    assert multiplicidade == n
    assert is_stable_1d(linear).is_stable
    assert is_stable_1d(quadratico).is_stable


def test_fatores_de_nitidez_gamma_nao_positivo():
    with pytest.raises(HypothesisError):
        sharpness_factors(1.0, 1.0, 10)
