"""The three networks: layer shapes, parameter counts, checkpoints."""

import tempfile

import numpy as np

from asldigits import models

for name in models.ARCHITECTURES:
    m = models.init_parameters(models.build_architecture(name), seed=1)
    print(f"\n{name}: {m.parameter_count():,} parameters")
    for layer, shape in zip(m.spec.layers, m.shapes):
        print(f"  {layer.kind:<8} -> {shape}")

x = np.random.default_rng(0).random((4, 1, 64, 64), dtype=np.float32)
probs, _ = models.forward(m, x, "eval")
print("\nuntrained proposed net, eval mode:", probs.shape, "rows sum to", probs.sum(axis=1))

path = tempfile.mkdtemp()
models.save_checkpoint(m, path)
again = models.load_checkpoint(path)
same = all(np.array_equal(a, b) for a, b in zip(m.params, again.params))
print("checkpoint reload bitwise identical:", same)
