"""Seeded finite-difference cases, ten shapes per differentiable layer.

Each case builds float64 modules with weights drawn at unit-ish scale so
that the check is not dominated by tiny initial weights, and returns
``(fn, inputs)`` for :func:`codelens.nn.gradcheck.check_gradients`.
"""
import numpy as np

from codelens.nn import functional as F
from codelens.nn.layers import BatchNorm, Conv2d, EncoderBlock, LayerNorm, Linear, MLP, MultiHeadAttention
from codelens.nn.models import ResNet, ResNetConfig, SeqClassifier, SeqConfig, ViT, ViTConfig
from codelens.nn.tensor import Tensor, concat

F64 = np.float64
SEEDS = range(10)


def _t(rng, *shape, scale=1.0):
    return Tensor(rng.normal(0, scale, size=shape), requires_grad=True)


def _rescale(module, rng, scale=0.5):
    for p in module.parameters():
        p.data = rng.normal(0, scale, size=p.data.shape)
    return module


def linear(seed):
    rng = np.random.default_rng(seed)
    d_in, d_out, b = rng.integers(1, 7, size=3)
    layer = _rescale(Linear(int(d_in), int(d_out), rng, dtype=F64), rng)
    x = _t(rng, int(b), int(d_in))
    return lambda *_: layer(x), [x, *layer.parameters()]


def conv(seed):
    rng = np.random.default_rng(seed)
    kernel, stride = [(3, 1), (3, 2), (1, 2), (1, 1)][seed % 4]
    cin, cout = (int(v) for v in rng.integers(1, 4, size=2))
    h, w = (int(v) for v in rng.integers(3, 7, size=2))
    layer = _rescale(Conv2d(cin, cout, rng, kernel=kernel, stride=stride, dtype=F64), rng)
    x = _t(rng, 2, h, w, cin)
    return lambda *_: layer(x), [x, *layer.parameters()]


def batchnorm_eval(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, 5))
    bn = _rescale(BatchNorm(c, F64), rng)
    bn.running_mean[:] = rng.normal(size=c)
    bn.running_var[:] = rng.uniform(0.5, 2.0, size=c)
    bn.eval()
    x = _t(rng, 2, int(rng.integers(1, 4)), int(rng.integers(1, 4)), c)
    return lambda *_: bn(x), [x, *bn.parameters()]


def batchnorm_train(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, 5))
    bn = _rescale(BatchNorm(c, F64), rng)
    x = _t(rng, 3, int(rng.integers(1, 4)), int(rng.integers(2, 4)), c)
    return lambda *_: bn(x), [x, *bn.parameters()]


def layernorm(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 9))
    ln = _rescale(LayerNorm(d, F64), rng)
    x = _t(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)), d)
    return lambda *_: ln(x), [x, *ln.parameters()]


def attention(seed):
    rng = np.random.default_rng(seed)
    heads = int(rng.integers(1, 3))
    dim = heads * int(rng.integers(1, 4))
    n, m = (int(v) for v in rng.integers(1, 5, size=2))
    att = _rescale(MultiHeadAttention(dim, heads, rng, F64), rng)
    x = _t(rng, 2, n, dim)
    if seed % 2:
        ctx = _t(rng, 2, m, dim)
        mask = rng.random((2, 1, n, m)) < 0.7
        mask[..., 0] = True
        return lambda *_: att(x, ctx, mask), [x, ctx, *att.parameters()]
    return lambda *_: att(x), [x, *att.parameters()]


def gap(seed):
    rng = np.random.default_rng(seed)
    x = _t(rng, int(rng.integers(1, 3)), int(rng.integers(1, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 4)))
    return lambda *_: F.global_avg_pool(x), [x]


def gelu(seed):
    rng = np.random.default_rng(seed)
    x = _t(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)), scale=2.0)
    return lambda *_: x.gelu(), [x]


def softmax(seed):
    rng = np.random.default_rng(seed)
    x = _t(rng, int(rng.integers(1, 4)), int(rng.integers(1, 6)), scale=2.0)
    if seed % 2:
        return lambda *_: x.log_softmax(axis=-1), [x]
    return lambda *_: x.softmax(axis=-1), [x]


def cross_entropy(seed):
    rng = np.random.default_rng(seed)
    b = int(rng.integers(1, 8))
    logits = _t(rng, b, 2, scale=2.0)
    labels = rng.integers(0, 2, size=b)
    return lambda *_: F.cross_entropy(logits, labels), [logits]


def elementwise(seed):
    # arithmetic, broadcasting, reductions and shape ops used by the layers
    rng = np.random.default_rng(seed)
    a = _t(rng, 3, int(rng.integers(1, 4)))
    b = _t(rng, a.shape[1])
    c = Tensor(rng.uniform(0.5, 2.0, size=a.shape), requires_grad=True)

    def fn(*_):
        y = (a * b + a / c - b) @ _t_fixed
        z = concat([y, (c.log() + a.tanh()).sum(axis=1, keepdims=True)], axis=1)
        return z.exp().reshape(-1)[1:] * 0.5 + z.transpose(1, 0).mean(axis=0).sum()

    global _t_fixed
    _t_fixed = Tensor(rng.normal(size=(a.shape[1], 2)))
    return fn, [a, b, c]


def mlp(seed):
    rng = np.random.default_rng(seed)
    d_in, hid, d_out = (int(v) for v in rng.integers(1, 6, size=3))
    m = _rescale(MLP(d_in, hid, d_out, rng, F64), rng)
    x = _t(rng, 2, d_in)
    return lambda *_: m(x), [x, *m.parameters()]


def encoder_block(seed):
    rng = np.random.default_rng(seed)
    heads = int(rng.integers(1, 3))
    dim = 2 * heads
    blk = _rescale(EncoderBlock(dim, heads, 4, rng, F64), rng)
    x = _t(rng, 2, int(rng.integers(1, 4)), dim)
    if seed % 2:
        mem = Tensor(rng.normal(size=(2, 2, dim)))
        return lambda *_: blk(x, mem), [x, *blk.parameters()]
    return lambda *_: blk(x), [x, *blk.parameters()]


def vit(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.choice([2, 4]))
    cfg = ViTConfig((8, 8), p, 4, 1, int(rng.integers(1, 3)), 6)
    model = _rescale(ViT(cfg, seed, F64), rng, 0.3)
    x = rng.random((2, 8, 8))
    return lambda *_: model(x), model.parameters()


KINK_MARGIN = 1e-3


def relu_margin(fn) -> float:
    """Smallest |input| seen by any ReLU during one forward pass of ``fn``."""
    seen = []
    original = Tensor.relu

    def spy(self):
        seen.append(float(np.abs(self.data).min()))
        return original(self)

    Tensor.relu = spy
    try:
        fn()
    finally:
        Tensor.relu = original
    return min(seen, default=np.inf)


def relu(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(int(rng.integers(1, 5)), int(rng.integers(1, 5))))
    x = Tensor(np.where(np.abs(x) < KINK_MARGIN, KINK_MARGIN, x), requires_grad=True)
    return lambda *_: x.relu(), [x]


def resnet(seed):
    # finite differences are undefined at a ReLU kink, so inputs are redrawn
    # until every pre-activation sits at least KINK_MARGIN away from zero
    rng = np.random.default_rng(seed)
    model = _rescale(ResNet(ResNetConfig((8, 8), 2, 1), seed, F64), rng, 0.5)
    for m in model.modules():
        if isinstance(m, BatchNorm):
            m.running_var[:] = rng.uniform(0.5, 2.0, size=m.running_var.shape)
    model.eval()
    while True:
        x = rng.random((2, 8, 8))
        if relu_margin(lambda: model(x)) > KINK_MARGIN:
            return lambda *_: model(x), model.parameters()


def seq(seed):
    # memory is gradient-stopped by design, so finite differences (which see
    # through it) only apply when memory is off or never reached: even seeds
    # run several segments without memory, odd seeds one segment with it
    rng = np.random.default_rng(seed)
    mem = 0 if seed % 2 == 0 else int(rng.integers(1, 4))
    cfg = SeqConfig(dim=4, depth=int(rng.integers(1, 3)), heads=2, mlp_dim=6, segment_len=3, mem_len=mem)
    model = _rescale(SeqClassifier(cfg, seed, F64), rng, 0.4)
    longest = 8 if mem == 0 else cfg.segment_len
    vecs = [-rng.exponential(3, size=int(rng.integers(1, longest + 1))) for _ in range(2)]
    return lambda *_: model(vecs), model.parameters()


CASES = {
    "linear": linear,
    "conv": conv,
    "batchnorm_eval": batchnorm_eval,
    "batchnorm_train": batchnorm_train,
    "layernorm": layernorm,
    "attention": attention,
    "gap": gap,
    "gelu": gelu,
    "relu": relu,
    "softmax": softmax,
    "cross_entropy": cross_entropy,
    "elementwise": elementwise,
    "mlp": mlp,
    "encoder_block": encoder_block,
    "vit": vit,
    "resnet": resnet,
    "seq": seq,
}
