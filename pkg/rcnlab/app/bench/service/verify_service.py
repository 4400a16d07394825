#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import hashlib
import math

from fractions import Fraction
from typing import Any, Callable

import numpy as np

from rcnlab.app.bench.schema.bench import SuiteResult, SweepConfig
from rcnlab.app.bench.service.sweep_service import sweep_service
from rcnlab.app.bench.service.train_service import train_service
from rcnlab.app.core_model.service.primitives import sign_array
from rcnlab.app.dimreduce.service.dimreduce_service import dimreduce_service
from rcnlab.app.hardness.schema.hardness import ThresholdLtf
from rcnlab.app.hardness.service.construction_service import construction_service
from rcnlab.app.hardness.service.correlation_service import correlation_service
from rcnlab.app.hardness.service.fourier_service import fourier_service
from rcnlab.app.hardness.service.kravchuk_service import kravchuk_service
from rcnlab.app.simulate.crud.crud_dataset import dataset_dao
from rcnlab.app.simulate.schema.simulate import SimulatorConfig
from rcnlab.app.simulate.service.simulate_service import simulate_service
from rcnlab.common.enums import Learner, SuiteStatus
from rcnlab.common.exception import errors
from rcnlab.common.log import bind_trial, log
from rcnlab.core.conf import settings
from rcnlab.utils.rng import Stream, make_rng
from rcnlab.utils.serializers import encode_json
from rcnlab.utils.timer import Stopwatch

VERIFY_SEED = 20240607


def _default_eta() -> Fraction:
    return Fraction(settings.HARDNESS_DEFAULT_ETA).limit_denominator(1000)


def _fail(msg: str, **counterexample: Any) -> None:
    raise errors.VerificationError(msg=msg, data=counterexample)


def _random_signs(rng: np.random.Generator, d: int) -> tuple[int, ...]:
    return tuple(int(c) for c in np.where(rng.integers(0, 2, size=d) == 1, 1, -1))


def _sha256(content: bytes | str) -> str:
    if isinstance(content, str):
        content = content.encode('utf-8')
    return hashlib.sha256(content).hexdigest()


class VerifyService:
    """不变量校验套件服务类"""

    def suites(self) -> list[tuple[str, Callable[[bool], dict[str, Any]]]]:
        """按执行顺序排列的 (名称, 套件)"""
        return [
            ('subgradient_identity', self.suite_subgradient_identity),
            ('learner_guarantee', self.suite_learner_guarantee),
            ('jl_pipeline', self.suite_jl_pipeline),
            ('kravchuk_oracle', self.suite_kravchuk_oracle),
            ('fourier_oracle', self.suite_fourier_oracle),
            ('pmf_correlation', self.suite_pmf_correlation),
            ('rk_identity', self.suite_rk_identity),
            ('correlation_bound', self.suite_correlation_bound),
            ('near_orthogonal', self.suite_near_orthogonal),
            ('reproducibility', self.suite_reproducibility),
        ]

    @staticmethod
    def suite_subgradient_identity(quick: bool) -> dict[str, Any]:
        """随机元组上的关键恒等式与次梯度范数界"""
        n, d = (10_000 if quick else 100_000), 6
        rng = make_rng(VERIFY_SEED, Stream.verify)
        W = rng.standard_normal((n, d))
        W /= np.maximum(np.linalg.norm(W, axis=1, keepdims=True), 1.0)
        W_bar = rng.uniform(-1, 1, (n, d)) / math.sqrt(d)
        X = rng.standard_normal((n, d))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        eta = rng.uniform(0, 0.5, n)
        wx = np.einsum('ij,ij->i', W, X)
        wbx = np.einsum('ij,ij->i', W_bar, X)
        g = (0.5 * ((1 - 2 * eta) * sign_array(wx) - y))[:, None] * X
        g_bar = (0.5 * ((1 - 2 * eta) * sign_array(wbx) - y))[:, None] * X
        lhs = np.einsum('ij,ij->i', g - g_bar, W - W_bar)
        rhs = (1 - 2 * eta) * (sign_array(wx) != sign_array(wbx)) * (np.abs(wx) + np.abs(wbx))
        deviation = np.abs(lhs - rhs)
        worst = int(np.argmax(deviation))
        if deviation[worst] > 1e-10:
            _fail('key identity deviates', index=worst, deviation=float(deviation[worst]), eta=float(eta[worst]))
        excess = np.linalg.norm(g, axis=1) - (1 - eta)
        worst = int(np.argmax(excess))
        if excess[worst] > 1e-12:
            _fail('subgradient norm exceeds 1 - eta', index=worst, excess=float(excess[worst]))
        return {'checks': 2 * n, 'max_deviation': float(deviation.max())}

    @staticmethod
    def suite_learner_guarantee(quick: bool) -> dict[str, Any]:
        """端到端学习保证：测试误差不超过 eta + eps，且每次运行满足平均遗憾界"""
        if quick:
            d, gamma, eta, eps, n, seeds, test_size, need = 10, 0.2, 0.2, 0.3, 2000, 3, 20_000, 2
        else:
            d, gamma, eta, eps, n, seeds, test_size, need = 20, 0.2, 0.2, 0.15, 5000, 20, 100_000, 18
        successes = 0
        for seed in range(seeds):
            dataset, _ = simulate_service.generate_dataset(
                config=SimulatorConfig(d=d, gamma=gamma, eta=eta, n=n, seed=seed)
            )
            with bind_trial(f'guarantee.{seed}'):
                record = train_service.run(
                    dataset=dataset,
                    eps=eps,
                    delta=0.1,
                    test_size=test_size,
                    guarantee_rows=settings.VERIFY_GUARANTEE_TEST_ROWS,
                    timing=False,
                )
            if not record.guarantee['regret_holds']:
                _fail(
                    'average regret exceeds its bound',
                    seed=seed,
                    avg_regret=record.guarantee['avg_regret'],
                    bound=record.guarantee['regret_bound'],
                )
            successes += record.errors.test <= eta + eps
        if successes < need:
            _fail('too few runs reach error eta + eps', successes=successes, required=need, seeds=seeds)
        return {'checks': 2 * seeds, 'successes': successes}

    @staticmethod
    def suite_jl_pipeline(quick: bool) -> dict[str, Any]:
        """降维学习的测试误差，以及推导维度下的间隔保持比例"""
        if quick:
            d, n, m, T, seeds, need, rows = 60, 2000, 40, 500, 3, 2, 300
        else:
            d, n, m, T, seeds, need, rows = 500, 5000, 300, 3000, 10, 8, 1000
        gamma, eta, eps, delta = 0.25, 0.2, 0.2, 0.1
        successes = 0
        preserved = 0
        for seed in range(seeds):
            dataset, instance = simulate_service.generate_dataset(
                config=SimulatorConfig(d=d, gamma=gamma, eta=eta, n=n, seed=seed)
            )
            with bind_trial(f'jl.{seed}'):
                record = train_service.run(
                    dataset=dataset,
                    eps=eps,
                    delta=delta,
                    T=T,
                    learner=Learner.jl,
                    m=m,
                    jl_seed=seed,
                    test_size=20_000,
                    timing=False,
                )
            successes += record.errors.test <= eta + eps
            config = dimreduce_service.derive_jl_config(eps=eps, delta=delta, gamma=gamma, n=n, seed=seed)
            matrix = dimreduce_service.sample_jl_matrix(config=config, d=d)
            fraction = dimreduce_service.margin_preservation_fraction(
                matrix=matrix, w_star=instance.w_star, X=dataset.X[:rows], gamma=gamma
            )
            preserved += fraction <= config.beta_prime
        if successes < need:
            _fail('too few reduced runs reach error eta + eps', successes=successes, required=need)
        if preserved < seeds - seeds // 10:
            _fail('margin preservation failed for too many matrices', preserved=preserved, seeds=seeds)
        return {'checks': 2 * seeds, 'successes': successes, 'preserved': preserved, 'm_train': m}

    @staticmethod
    def suite_kravchuk_oracle(quick: bool) -> dict[str, Any]:
        """闭式 Kravchuk 值与子集对定义逐项相等，并检查对称性、|K| <= 1 以及 k <= d/2 时的幅值上界"""
        checks = 0
        for n in range(9 if quick else 13):
            for a in range(n + 1):
                for b in range(n + 1):
                    closed = kravchuk_service.kravchuk(n, a, b)
                    brute = kravchuk_service.kravchuk_brute_force(n, a, b)
                    if closed != brute:
                        _fail('closed form differs from brute force', n=n, a=a, b=b, closed=closed, brute=brute)
                    checks += 1
        for n in range(25 if quick else settings.HARDNESS_EXACT_MAX_N + 1):
            table = kravchuk_service.kravchuk_table(n)
            for a in range(n + 1):
                for b in range(n + 1):
                    value = table[a, b]
                    if value != table[b, a] or abs(value) != abs(table[a, n - b]) or abs(value) > 1:
                        _fail('Kravchuk table invariant violated', n=n, a=a, b=b, value=value)
                    checks += 1
        for d in range(1, 25 if quick else 41):
            for m in range(d + 1):
                for k in range(d // 2 + 1):
                    bound = kravchuk_service.kravchuk_bound_check(d, m, k)
                    if not bound.holds:
                        _fail(
                            'Kravchuk magnitude bound violated', d=d, m=m, k=k, value=bound.value, bound=bound.bound
                        )
                    checks += 1
        return {'checks': checks}

    @staticmethod
    def suite_fourier_oracle(quick: bool) -> dict[str, Any]:
        """Kravchuk 系数公式与穷举 E[f chi_T] 相等，并检查 Parseval"""
        rng = make_rng(VERIFY_SEED + 1, Stream.verify)
        max_d = 10 if quick else settings.HARDNESS_FOURIER_MAX_D
        trials = 40 if quick else 200
        for _ in range(trials):
            d = int(rng.integers(1, max_d + 1))
            ltf = ThresholdLtf(v=_random_signs(rng, d), s_star=int(rng.integers(0, d + 2)))
            subset = [i for i in range(d) if rng.random() < 0.5]
            formula = fourier_service.fourier_coefficient(ltf, subset)
            exhaustive = fourier_service.fourier_coefficient_exhaustive(ltf, subset)
            if formula != exhaustive:
                _fail('Fourier formula differs from enumeration', v=ltf.v, s_star=ltf.s_star, subset=subset)
        for d in range(1, max_d + 1):
            ltf = ThresholdLtf(v=_random_signs(rng, d), s_star=int(rng.integers(0, d + 2)))
            exhaustive, formula, mass, equal = fourier_service.parseval_check(ltf)
            if not equal:
                _fail('Parseval identity fails', v=ltf.v, s_star=ltf.s_star, exhaustive=exhaustive, mass=mass)
        return {'checks': trials + max_d}

    @staticmethod
    def suite_pmf_correlation(quick: bool) -> dict[str, Any]:
        """条件概率与相关性的公式路径和穷举路径一致，修正后的界成立"""
        rng = make_rng(VERIFY_SEED + 2, Stream.verify)
        eta = _default_eta()
        max_d = 8 if quick else 12
        pairs = 10 if quick else 50
        lemma_pair = lemma_self = 0
        for _ in range(pairs):
            d = int(rng.integers(2, max_d + 1))
            s_star = int(rng.integers(0, d + 2))
            dist_v = correlation_service.make_distribution(v=_random_signs(rng, d), eta=eta, s_star=s_star)
            dist_u = correlation_service.make_distribution(v=_random_signs(rng, d), eta=eta, s_star=s_star)
            x = _random_signs(rng, d)
            for label in (0, 1):
                closed = correlation_service.pmf_conditional(dist_v, x, label)
                enumerated = correlation_service.pmf_conditional_enumerated(dist_v, x, label)
                if closed != enumerated:
                    _fail('pmf formula differs from enumeration', v=dist_v.ltf.v, s_star=s_star, x=x, label=label)
                if correlation_service.pmf_mass(dist_v, label) != 1:
                    _fail('pmf does not sum to one', v=dist_v.ltf.v, s_star=s_star, label=label)
            report = correlation_service.correlation_pair(dist_v, dist_u)
            if not report.corrected_holds:
                _fail('corrected correlation bound fails', v=report.v, u=report.u, s_star=s_star)
            lemma_pair += report.chi_pair_lemma_holds
            lemma_self += report.chi_self_lemma_holds
        return {'checks': 5 * pairs, 'lemma_pair_holds': lemma_pair, 'lemma_self_holds': lemma_self}

    @staticmethod
    def suite_rk_identity(quick: bool) -> dict[str, Any]:
        """sum_k R_k = E[f_v f_u]、R_0 = E[f_v]^2 与 R_d 的边界"""
        rng = make_rng(VERIFY_SEED + 3, Stream.verify)
        dims = (4, 8, 12) if quick else (4, 8, 12, 16, 20)
        eta = _default_eta()
        checks = 0
        for d in dims:
            v, u = _random_signs(rng, d), _random_signs(rng, d)
            for s_star in range(d + 2):
                dist_v = correlation_service.make_distribution(v=v, eta=eta, s_star=s_star)
                dist_u = correlation_service.make_distribution(v=u, eta=eta, s_star=s_star)
                terms = correlation_service.rk_decomposition(dist_v, dist_u)
                joint = Fraction(correlation_service.class_counts(dist_v, dist_u)[1, 1], 1 << d)
                if sum(terms) != joint:
                    _fail('level sum differs from E[f_v f_u]', v=v, u=u, s_star=s_star)
                if terms[0] != dist_v.eps_actual**2:
                    _fail('R_0 differs from E[f_v]^2', v=v, s_star=s_star)
                if abs(terms[d]) > correlation_service.rd_bound(d, s_star):
                    _fail('R_d exceeds its bound', v=v, u=u, s_star=s_star)
                checks += 3
        return {'checks': checks}

    @staticmethod
    def suite_correlation_bound(quick: bool) -> dict[str, Any]:
        """d = 20 的近正交族上，所有 v·u != 0 的对满足相关界且最小常数不超过 10"""
        d, c, count = 20, 0.25, (6 if quick else 16)
        eta = _default_eta()
        vectors = construction_service.near_orthogonal_set(d=d, c=c, count=count, seed=VERIFY_SEED)
        dists = [correlation_service.make_distribution(v=tuple(v), eta=eta, target_mass=0.1) for v in vectors]
        reports = correlation_service.correlate_family(dists, C=10.0)
        worst_c = 0.0
        orthogonal = 0
        orthogonal_ratio = 0.0
        for report in reports:
            bound = report.bound
            if not bound.hypothesis_met:
                _fail('near-orthogonal pair misses the hypothesis', v=report.v, u=report.u)
            if report.inner_product == 0:
                orthogonal += 1
                orthogonal_ratio = max(orthogonal_ratio, bound.ratio)
                continue
            if not bound.holds or bound.min_C > 10:
                _fail('correlation bound fails', v=report.v, u=report.u, min_C=bound.min_C)
            worst_c = max(worst_c, bound.min_C)
        return {
            'checks': len(reports),
            'max_min_C': worst_c,
            'orthogonal_pairs': orthogonal,
            'orthogonal_max_ratio': orthogonal_ratio,
        }

    @staticmethod
    def suite_near_orthogonal(quick: bool) -> dict[str, Any]:
        """d = 64, c = 0.25 的 32 个向量两两 |v·u| <= 22"""
        vectors = construction_service.near_orthogonal_set(d=64, c=0.25, count=32, seed=VERIFY_SEED)
        ok, worst = construction_service.verify_near_orthogonal(vectors, 0.25)
        if not ok or worst > 22:
            _fail('near-orthogonal family violates the threshold', worst=worst)
        return {'checks': 32 * 31 // 2, 'max_inner_product': worst}

    @staticmethod
    def suite_reproducibility(quick: bool) -> dict[str, Any]:
        """相同参数重复执行的输出哈希一致"""
        config = SimulatorConfig(d=8, gamma=0.2, eta=0.1, n=300 if quick else 1000, seed=7)
        sweep = SweepConfig(d=[5], gamma=[0.3], eta=[0.1], eps=[0.4], N=[200], seeds_per_cell=2, test_size=500)
        dists = [
            correlation_service.make_distribution(v=v, eta=Fraction(1, 3), s_star=4)
            for v in ((1,) * 6, (1, 1, -1, 1, -1, 1), (-1, 1, 1, 1, 1, -1))
        ]

        def outputs() -> dict[str, str]:
            dataset, _ = simulate_service.generate_dataset(config=config)
            text = dataset_dao.dumps(dataset)
            record = train_service.run(dataset=dataset_dao.loads(text), eps=0.3, delta=0.1, T=200, timing=False)
            rows = sweep_service.run(sweep, parallel=1, timing=False)
            return {
                'simulate': _sha256(text),
                'train': _sha256(train_service.dumps(record)),
                'sweep': _sha256(sweep_service.dumps(rows)),
                'correlate': _sha256(correlation_service.reports_json(correlation_service.correlate_family(dists))),
                'kravchuk': _sha256(kravchuk_service.table_json(kravchuk_service.kravchuk_table(6))),
            }

        first, second = outputs(), outputs()
        for name, digest in first.items():
            if second[name] != digest:
                _fail('output is not reproducible', command=name, first=digest, second=second[name])
        return {'checks': len(first), 'digests': first}

    def run_suite(self, name: str, suite: Callable[[bool], dict[str, Any]], quick: bool) -> SuiteResult:
        """
        执行单个套件，捕获失败并记录反例

        :param name: 套件名称
        :param suite: 套件函数
        :param quick: 是否使用缩减预算
        :return:
        """
        result = SuiteResult(name=name, status=SuiteStatus.passed)
        with bind_trial(name), Stopwatch() as watch:
            try:
                notes = suite(quick)
            except errors.BaseExceptionMixin as exc:
                result.status = SuiteStatus.failed
                result.message = exc.msg
                if isinstance(exc, errors.VerificationError):
                    result.counterexample = exc.data
                else:
                    # 生成、学习或预算错误中断套件时记录错误类型
                    result.counterexample = {'error': type(exc).__name__, 'data': exc.data}
                log.error(f'套件 {name} 失败: {exc.msg} {result.counterexample}')
            else:
                result.checks = notes.pop('checks', 0)
                result.notes = notes
        result.elapsed_ms = watch.elapsed_ms
        log.info(f'套件 {name}: {result.status} ({result.elapsed_ms:.0f} ms)')
        return result

    def run(self, *, quick: bool = False, only: list[str] | None = None) -> list[SuiteResult]:
        """
        依次执行全部套件

        :param quick: 是否使用缩减预算
        :param only: 仅执行指定名称的套件
        :return:
        """
        suites = self.suites()
        if only:
            unknown = set(only) - {name for name, _ in suites}
            if unknown:
                raise errors.RangeError(msg=f'unknown suite names: {sorted(unknown)}')
            suites = [(name, suite) for name, suite in suites if name in only]
        return [self.run_suite(name, suite, quick) for name, suite in suites]

    @staticmethod
    def dumps(results: list[SuiteResult], *, quick: bool) -> bytes:
        """校验报告 JSON 文本"""
        passed = all(result.passed for result in results)
        return encode_json(
            {
                'schema': 'verify',
                'quick': quick,
                'status': str(SuiteStatus.passed if passed else SuiteStatus.failed),
                'suites': [result.to_dict() for result in results],
            }
        )


verify_service: VerifyService = VerifyService()
