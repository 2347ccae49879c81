import numpy as np
import numpy.testing as npt
import pytest

from synthesis_tools.term import signature, parse_term, make_term
from synthesis_tools.modeling import tnn
from synthesis_tools.modeling.tnn import train_example, train_schedule
from synthesis_tools.errors import (SignatureError, DimensionError, EmptyDatasetError,
                                    CheckpointFormatError, CheckpointVersionError)

HEADS = {'policy': 5, 'value': 1}

@pytest.fixture
def sig():
    return signature([('f', 2), ('g', 1), ('a', 0), ('b', 0)])

@pytest.fixture
def model(sig):
    return tnn.init_model(sig, 4, HEADS, seed=1)

@pytest.fixture
def zero_model(sig):
    m = tnn.init_model(sig, 4, HEADS, seed=0)
    for k in m.params:
        m.params[k] = np.zeros_like(m.params[k])
    return m

def reference_embed(model, t):
    """Plain recursive forward pass"""
    if not t.args:
        return model.leaf_vector(t.op.name)
    x = np.concatenate([reference_embed(model, a) for a in t.args])
    p = model.params
    return np.tanh(p[('op', t.op.name, 'W')] @ x + p[('op', t.op.name, 'b')])

def reference_infer(model, t):
    e = reference_embed(model, t)
    out = {}
    for name in model.heads:
        p = model.params
        h = np.tanh(p[('head', name, 0, 'W')] @ e + p[('head', name, 0, 'b')])
        y = np.tanh(p[('head', name, 1, 'W')] @ h + p[('head', name, 1, 'b')])
        out[name] = (y + 1) / 2
    return out['policy'], out['value'][0]

def random_term(sig, rng, depth=3):
    if depth == 0 or rng.random() < 0.3:
        return make_term(sig, 'a' if rng.random() < 0.5 else 'b')
    if rng.random() < 0.5:
        return make_term(sig, 'g', random_term(sig, rng, depth - 1))
    return make_term(sig, 'f', random_term(sig, rng, depth - 1), random_term(sig, rng, depth - 1))

def test_parameter_shapes(model):
    p = model.params
    assert p[('op', 'a')].shape == (4,)
    assert p[('op', 'f', 'W')].shape == (4, 8)
    assert p[('op', 'g', 'W')].shape == (4, 4)
    assert p[('head', 'policy', 1, 'W')].shape == (5, 4)
    assert p[('head', 'value', 1, 'b')].shape == (1,)

def test_bad_shapes_rejected(sig, model):
    params = dict(model.params)
    params[('op', 'f', 'W')] = np.zeros((4, 4))
    with pytest.raises(DimensionError):
        tnn.tnn_model(sig, 4, HEADS, params)

def test_embed_leaf(sig, model):
    npt.assert_array_equal(tnn.embed(model, make_term(sig, 'a')), model.params[('op', 'a')])

def test_embed_zero_weights(sig, zero_model):
    t = parse_term('f(f(a,b),g(a))', sig)
    npt.assert_array_equal(tnn.embed(zero_model, t), np.zeros(4))

def test_infer_zero_weights(sig, zero_model):
    policy, value = tnn.infer(zero_model, parse_term('g(a)', sig))
    npt.assert_array_equal(policy, np.full(5, 0.5))
    assert value == 0.5

def test_infer_matches_reference(sig):
    rng = np.random.default_rng(0)
    for i in range(100):
        model = tnn.init_model(sig, 4, HEADS, seed=i)
        t = random_term(sig, rng)
        policy, value = tnn.infer(model, t)
        ref_policy, ref_value = reference_infer(model, t)
        assert np.max(np.abs(policy - ref_policy)) < 1e-12
        assert abs(value - ref_value) < 1e-12

def test_outputs_in_unit_interval(sig):
    rng = np.random.default_rng(1)
    for i in range(200):
        model = tnn.init_model(sig, 4, HEADS, seed=i)
        for k in model.params:
            model.params[k] *= 5
        policy, value = tnn.infer(model, random_term(sig, rng))
        assert np.all((policy >= 0) & (policy <= 1))
        assert 0 <= value <= 1

def test_unknown_operator(sig, model):
    other = signature([('h', 1), ('a', 0)])
    with pytest.raises(SignatureError):
        tnn.embed(model, parse_term('h(a)', other))

def test_embedding_cache_is_exact(sig):
    model = tnn.init_model(sig, 4, HEADS, seed=3, cache_size=4)
    plain = model.copy(cache_size=0)
    rng = np.random.default_rng(2)
    for _ in range(20):
        t = random_term(sig, rng)
        npt.assert_array_equal(tnn.embed(model, t), tnn.embed(plain, t))

def test_cached_subterm_is_not_descended(sig):
    # 'c' is unknown to the model, so only a cache hit on g(c) avoids an error
    wider = signature([('f', 2), ('g', 1), ('a', 0), ('c', 0)])
    inner = parse_term('g(c)', wider)
    model = tnn.init_model(sig, 4, HEADS, seed=3, cache_size=10)
    model._cache[inner] = np.full(4, 0.25)
    t = parse_term('f(a,g(c))', wider)
    p = model.params
    expected = np.tanh(p[('op', 'f', 'W')] @ np.concatenate([p[('op', 'a')], np.full(4, 0.25)]) + p[('op', 'f', 'b')])
    npt.assert_allclose(tnn.embed(model, t), expected)
    with pytest.raises(SignatureError):
        tnn.embed(model.copy(cache_size=0), t)

def test_loss_zero_model(sig, zero_model):
    ex = train_example(parse_term('a', sig), np.array([1.0, 0, 0, 0, 0]), 1.0)
    assert tnn.loss(zero_model, ex) == pytest.approx(0.5)

def test_loss_exact_targets(sig, zero_model):
    ex = train_example(parse_term('a', sig), np.full(5, 0.5), 0.5)
    assert tnn.loss(zero_model, ex) == 0.0
    grads = tnn.backprop(zero_model, ex)
    assert all(not np.any(g) for g in grads.values())

def test_loss_dimension_mismatch(sig, model):
    ex = train_example(parse_term('a', sig), np.full(3, 1/3), 0.5)
    with pytest.raises(DimensionError):
        tnn.loss(model, ex)

def test_batch_loss_is_mean(sig, model):
    examples = [train_example(parse_term(s, sig), np.array([0.2]*5), v)
                for s, v in (('a', 0.1), ('g(b)', 0.9), ('f(a,g(a))', 0.5))]
    assert tnn.batch_loss(model, examples) == pytest.approx(np.mean([tnn.loss(model, ex) for ex in examples]))
    assert tnn.batch_loss(model, examples[::-1]) == pytest.approx(tnn.batch_loss(model, examples))

def finite_difference(model, ex, key, idx, step=1e-5):
    p = model.params[key]
    old = p[idx]
    p[idx] = old + step
    up = tnn.loss(model, ex)
    p[idx] = old - step
    down = tnn.loss(model, ex)
    p[idx] = old
    return (up - down) / (2 * step)

def test_gradient_check(sig):
    rng = np.random.default_rng(5)
    for i in range(50):
        model = tnn.init_model(sig, 3, HEADS, seed=100 + i)
        t = random_term(sig, rng)
        policy = rng.dirichlet(np.ones(5))
        ex = train_example(t, policy, float(rng.random()))
        grads = tnn.backprop(model, ex)
        for key, g in grads.items():
            for idx in np.ndindex(g.shape):
                numeric = finite_difference(model, ex, key, idx)
                err = abs(numeric - g[idx]) / max(1e-7, abs(numeric) + abs(g[idx]))
                assert abs(numeric - g[idx]) < 1e-8 or err < 1e-4, (key, idx)

def test_shared_subterm_gradient(sig, model):
    # f(a,a) evaluates a once; the gradient on a sums both argument paths
    t = parse_term('f(a,a)', sig)
    ex = train_example(t, np.array([0.6, 0.1, 0.1, 0.1, 0.1]), 0.8)
    grads = tnn.backprop(model, ex)

    p = model.params
    e_a = p[('op', 'a')]
    x = np.concatenate([e_a, e_a])
    e = np.tanh(p[('op', 'f', 'W')] @ x + p[('op', 'f', 'b')])
    d_e = np.zeros(4)
    for name, target in (('policy', ex.policy), ('value', np.array([ex.value]))):
        h = np.tanh(p[('head', name, 0, 'W')] @ e + p[('head', name, 0, 'b')])
        y = np.tanh(p[('head', name, 1, 'W')] @ h + p[('head', name, 1, 'b')])
        dz2 = ((y + 1) / 2 - target) / len(target) * (1 - y**2)
        dz1 = (p[('head', name, 1, 'W')].T @ dz2) * (1 - h**2)
        d_e += p[('head', name, 0, 'W')].T @ dz1
    dx = p[('op', 'f', 'W')].T @ (d_e * (1 - e**2))
    npt.assert_allclose(grads[('op', 'a')], dx[:4] + dx[4:], rtol=1e-10, atol=1e-14)

def test_head_independence(sig, model):
    t = parse_term('f(g(a),b)', sig)
    policy, value = tnn.infer(model, t)
    changed = model.copy()
    changed.params[('head', 'value', 1, 'W')] += 1.0
    policy2, value2 = tnn.infer(changed, t)
    npt.assert_array_equal(policy, policy2)
    assert value != value2

    changed = model.copy()
    changed.params[('head', 'policy', 0, 'b')] += 1.0
    policy3, value3 = tnn.infer(changed, t)
    assert value3 == value
    assert np.any(policy3 != policy)

def test_train_zero_epochs(sig, model):
    ex = train_example(parse_term('a', sig), np.full(5, 0.2), 1.0)
    trained = tnn.train(model, [ex], train_schedule(epochs=0))
    for k in model.params:
        npt.assert_array_equal(trained.params[k], model.params[k])

def test_train_reduces_loss(sig, model):
    ex = train_example(parse_term('f(a,g(b))', sig), np.array([1.0, 0, 0, 0, 0]), 1.0)
    before = tnn.loss(model, ex)
    losses = [tnn.loss(tnn.train(model, [ex], train_schedule(epochs=n, learning_rate=0.02, seed=0)), ex)
              for n in (50, 100, 200)]
    assert before > losses[0] > losses[1] > losses[2]
    # one example, so the schedule seed cannot change the result
    again = tnn.train(model, [ex], train_schedule(epochs=200, learning_rate=0.02, seed=9))
    assert tnn.loss(again, ex) == pytest.approx(losses[2], rel=1e-12)
    trained = tnn.train(model, [ex], train_schedule(epochs=200, learning_rate=0.02, seed=0))
    # the input model is left untouched
    assert tnn.loss(model, ex) == before

def test_train_deterministic(sig, model):
    rng = np.random.default_rng(4)
    examples = [train_example(random_term(sig, rng), rng.dirichlet(np.ones(5)), float(rng.random()))
                for _ in range(40)]
    schedule = train_schedule(epochs=3, learning_rate=0.05, batch_size=8, seed=11)
    m1 = tnn.train(model, examples, schedule)
    m2 = tnn.train(model, examples, schedule)
    for k in m1.params:
        npt.assert_array_equal(m1.params[k], m2.params[k])

def test_train_empty(sig, model):
    with pytest.raises(EmptyDatasetError):
        tnn.train(model, [], train_schedule())

def test_checkpoint_round_trip(sig, model):
    text = tnn.save_model(model)
    assert text.startswith('tnn-checkpoint v1 dim=4\n')
    loaded = tnn.load_model(text)
    rng = np.random.default_rng(6)
    for _ in range(10):
        t = random_term(sig, rng)
        p1, v1 = tnn.infer(model, t)
        p2, v2 = tnn.infer(loaded, t)
        npt.assert_array_equal(p1, p2)
        assert v1 == v2
    assert tnn.save_model(loaded) == text

def test_checkpoint_truncated(model):
    lines = tnn.save_model(model).splitlines()
    with pytest.raises(CheckpointFormatError) as e:
        tnn.load_model('\n'.join(lines[:-1]))
    assert e.value.lineno == len(lines)

def test_checkpoint_bad_number(model):
    lines = tnn.save_model(model).splitlines()
    lines[2] = 'x' + lines[2]
    with pytest.raises(CheckpointFormatError) as e:
        tnn.load_model('\n'.join(lines))
    assert e.value.lineno == 3

def test_checkpoint_version(model):
    text = tnn.save_model(model).replace('tnn-checkpoint v1', 'tnn-checkpoint v2', 1)
    with pytest.raises(CheckpointVersionError):
        tnn.load_model(text)

def test_checkpoint_not_a_checkpoint():
    with pytest.raises(CheckpointFormatError) as e:
        tnn.load_model('hello\n')
    assert e.value.lineno == 1

def test_checkpoint_file(tmp_path, sig, model):
    path = tmp_path / 'gen_1.tnn'
    tnn.write_model_file(model, path)
    loaded = tnn.read_model_file(path)
    npt.assert_array_equal(loaded.params[('op', 'f', 'W')], model.params[('op', 'f', 'W')])
    with pytest.raises(IOError):
        tnn.read_model_file(tmp_path / 'missing.tnn')
