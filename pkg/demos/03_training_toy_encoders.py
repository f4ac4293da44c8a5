"""Contrastive pretraining of the toy encoders, with a gradient check.

Trains the linear image/text encoders to align class-matched pairs, prints
the loss trace, and verifies a few analytic gradient entries against
central finite differences. Run with:  python demos/03_training_toy_encoders.py
"""

import numpy as np

from vlscene import (
    TrainConfig,
    contrastive_loss,
    dataset_loss,
    gen_training_batches,
    init_params,
    loss_and_gradients,
    train_toy,
)
from vlscene.encoders import EncoderParams

# Raw training data: 6 classes, each a gaussian feature prototype paired
# with a fixed two-token text description.
batches = gen_training_batches(n_classes=6, feature_dim=16, vocab=64,
                               n_batches=12, noise=0.1, seed=5)
params = init_params(f=16, d=32, vocab=64, seed=0)

print(f"loss before training: {dataset_loss(params, batches, tau=0.07):.4f} "
      f"(chance level would be ln 6 = {np.log(6):.4f})")

trained, trace = train_toy(params, batches, TrainConfig(steps=150, lr=0.05, tau=0.07, seed=1))
for step in (0, 25, 50, 100, 149):
    print(f"  step {step:>3}: batch loss {trace[step]:.4f}")
print(f"loss after training:  {dataset_loss(trained, batches, tau=0.07):.4f}")
print()

# Spot-check the analytic gradients with central differences.
batch = batches[0]
loss, grads = loss_and_gradients(params, batch, tau=0.07)
h = 1e-5
print("gradient spot checks (analytic vs central difference):")
for name, idx in (("w_vision", (3, 7)), ("token_table", (4, 2)), ("w_text", (10, 20))):
    base = getattr(params, name)
    bumped_up, bumped_dn = base.copy(), base.copy()
    bumped_up[idx] += h
    bumped_dn[idx] -= h
    fields = {n: getattr(params, n) for n in ("w_vision", "token_table", "w_text")}
    up = contrastive_loss(EncoderParams(**{**fields, name: bumped_up}, seed=0), batch, 0.07)
    dn = contrastive_loss(EncoderParams(**{**fields, name: bumped_dn}, seed=0), batch, 0.07)
    numeric = (up - dn) / (2 * h)
    analytic = float(getattr(grads, name)[idx])
    print(f"  {name}{idx}: analytic {analytic:+.8f}  numeric {numeric:+.8f}")
