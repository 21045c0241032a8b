"""Q-learning machinery: network, replay memory, targets, training loop.

The action-value function is a small fully connected rectified-linear
network written directly in numpy (float64), trained with plain stochastic
gradient descent and global gradient-norm clipping. Keeping the backward
pass explicit makes the analytic gradient directly comparable against
finite differences and the whole loop bit-reproducible from a seed.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import DqnConfig
from .env import CachingEnv

CHECKPOINT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class Transition:
    """One replay record."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class QNetwork:
    """Feed-forward state -> per-action value approximator."""

    def __init__(self, state_dim: int, n_actions: int, hidden_sizes: list[int],
                 rng: np.random.Generator):
        self.state_dim = state_dim
        self.n_actions = n_actions
        self.hidden_sizes = list(hidden_sizes)
        sizes = [state_dim, *hidden_sizes, n_actions]
        self.weights = [rng.normal(0.0, np.sqrt(2.0 / sizes[i]),
                                   size=(sizes[i], sizes[i + 1]))
                        for i in range(len(sizes) - 1)]
        self.biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]

    # -- forward / backward ---------------------------------------------------

    def forward(self, states: np.ndarray) -> np.ndarray:
        """Q-values for a (batch, state_dim) array -> (batch, n_actions)."""
        h = np.atleast_2d(states)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return h @ self.weights[-1] + self.biases[-1]

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return self.forward(state[None, :])[0]

    def loss_and_grads(self, states: np.ndarray, actions: np.ndarray,
                       targets: np.ndarray):
        """Mean squared TD error on the taken actions, with its gradient."""
        states = np.atleast_2d(states)
        batch = states.shape[0]
        activations = [states]
        h = states
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
            activations.append(h)
        q = h @ self.weights[-1] + self.biases[-1]

        picked = q[np.arange(batch), actions]
        residual = picked - targets
        loss = float(np.mean(residual**2))

        dq = np.zeros_like(q)
        dq[np.arange(batch), actions] = 2.0 * residual / batch
        grads_w, grads_b = [], []
        delta = dq
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w.append(activations[layer].T @ delta)
            grads_b.append(delta.sum(axis=0))
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (activations[layer] > 0)
        grads_w.reverse()
        grads_b.reverse()
        return loss, (grads_w, grads_b)

    def apply_gradients(self, grads, learning_rate: float,
                        clip_norm: float | None = None) -> None:
        grads_w, grads_b = grads
        if clip_norm is not None:
            total = np.sqrt(sum(float(np.sum(g**2)) for g in grads_w + grads_b))
            if total > clip_norm:
                scale = clip_norm / total
                grads_w = [g * scale for g in grads_w]
                grads_b = [g * scale for g in grads_b]
        for w, gw in zip(self.weights, grads_w):
            w -= learning_rate * gw
        for b, gb in zip(self.biases, grads_b):
            b -= learning_rate * gb
        if not self.is_finite():
            raise TrainingDivergedError("network parameters became non-finite")

    # -- parameter plumbing -----------------------------------------------------

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.weights + self.biases)

    def copy_from(self, other: "QNetwork") -> None:
        for mine, theirs in zip(self.weights, other.weights):
            mine[...] = theirs
        for mine, theirs in zip(self.biases, other.biases):
            mine[...] = theirs

    def clone(self) -> "QNetwork":
        twin = QNetwork.__new__(QNetwork)
        twin.state_dim = self.state_dim
        twin.n_actions = self.n_actions
        twin.hidden_sizes = list(self.hidden_sizes)
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        return twin


class ReplayMemory:
    """Bounded FIFO of transitions with uniform without-replacement batches."""

    def __init__(self, capacity: int):
        self.buffer: deque[Transition] = deque(maxlen=capacity)

    def add(self, transition: Transition) -> None:
        self.buffer.append(transition)

    def __len__(self) -> int:
        return len(self.buffer)

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.choice(len(self.buffer), size=batch_size, replace=False)
        batch = [self.buffer[i] for i in idx]
        return (np.stack([t.state for t in batch]),
                np.array([t.action for t in batch]),
                np.array([t.reward for t in batch]),
                np.stack([t.next_state for t in batch]),
                np.array([t.done for t in batch]))


def epsilon_greedy(q: QNetwork, state: np.ndarray, epsilon: float,
                   rng: np.random.Generator, feasible_mask: np.ndarray) -> int:
    """Pick a feasible action: explore uniformly, else greedy (ties -> lowest)."""
    feasible = np.flatnonzero(feasible_mask)
    if feasible.size == 0:
        raise ValueError("no feasible action to select")
    if rng.random() < epsilon:
        return int(rng.choice(feasible))
    values = np.where(feasible_mask, q.q_values(state), -np.inf)
    return int(np.argmax(values))


def td_target(rewards: np.ndarray, next_states: np.ndarray, dones: np.ndarray,
              q_target: QNetwork, discount: float) -> np.ndarray:
    """Bootstrap targets: r for terminal transitions, r + gamma max Q' else."""
    next_best = q_target.forward(next_states).max(axis=1)
    return rewards + discount * next_best * (~dones.astype(bool))


def epsilon_schedule(hyper: DqnConfig, episode: int) -> float:
    """Linear decay over the first decay fraction of episodes, then flat."""
    span = max(1.0, hyper.epsilon_decay_fraction * hyper.episodes)
    frac = min(1.0, episode / span)
    return hyper.epsilon_start + (hyper.epsilon_end - hyper.epsilon_start) * frac


@dataclass
class CurvePoint:
    episode: int
    mean_reward: float
    epsilon: float
    mean_loss: float


def train_dqn(env: CachingEnv, hyper: DqnConfig, seed: int,
              world_seed: int | None = None
              ) -> tuple[QNetwork, list[CurvePoint]]:
    """Run the full training loop on the environment's action space.

    Returns the trained network and the per-episode learning curve. The same
    loop serves the full joint action space and the equal-bandwidth reduced
    space; the environment decides which one is in play. Passing
    ``world_seed`` resets every episode to that one world draw (a frozen
    scenario) instead of a fresh draw per episode.
    """
    ss = np.random.SeedSequence(seed)
    rng_init, rng_act, rng_replay, rng_env = [np.random.default_rng(s)
                                              for s in ss.spawn(4)]
    n_actions = len(env.action_space)
    q = QNetwork(env.state_dim, n_actions, hyper.hidden_sizes, rng_init)
    q_target = q.clone()
    memory = ReplayMemory(hyper.memory_size)
    mask = np.ones(n_actions, dtype=bool)  # enumeration already excludes infeasible

    curve: list[CurvePoint] = []
    step_count = 0
    for episode in range(hyper.episodes):
        eps = epsilon_schedule(hyper, episode)
        episode_seed = world_seed if world_seed is not None \
            else int(rng_env.integers(2**63))
        state = env.reset(episode_seed)
        rewards, losses = [], []
        for _ in range(env.config.horizon_slots):
            action = epsilon_greedy(q, state, eps, rng_act, mask)
            next_state, reward, _, done = env.step(action)
            memory.add(Transition(state, action, reward, next_state, done))
            if len(memory) >= hyper.batch_size:
                states, actions, rs, next_states, dones = memory.sample(
                    hyper.batch_size, rng_replay)
                targets = td_target(rs, next_states, dones, q_target, hyper.discount)
                loss, grads = q.loss_and_grads(states, actions, targets)
                if not np.isfinite(loss) or loss > hyper.divergence_loss_limit:
                    raise TrainingDivergedError(
                        f"loss {loss:.3e} at episode {episode}, step {step_count} "
                        f"exceeds limit {hyper.divergence_loss_limit:.1e}")
                q.apply_gradients(grads, hyper.learning_rate, hyper.grad_clip_norm)
                losses.append(loss)
            step_count += 1
            if step_count % hyper.target_sync_steps == 0:
                q_target.copy_from(q)
            state = next_state
            rewards.append(reward)
            if done:
                break
        curve.append(CurvePoint(episode=episode,
                                mean_reward=float(np.mean(rewards)),
                                epsilon=eps,
                                mean_loss=float(np.mean(losses)) if losses else float("nan")))
    return q, curve


# -- checkpoints ----------------------------------------------------------------


def save_checkpoint(q: QNetwork, path: str | Path, meta: dict | None = None) -> None:
    """Write architecture descriptor plus parameter arrays to an .npz file."""
    descriptor = {
        "version": CHECKPOINT_VERSION,
        "state_dim": q.state_dim,
        "n_actions": q.n_actions,
        "hidden_sizes": q.hidden_sizes,
        "activation": "relu",
        "meta": meta or {},
    }
    arrays = {f"w{i}": w for i, w in enumerate(q.weights)}
    arrays.update({f"b{i}": b for i, b in enumerate(q.biases)})
    np.savez(path, descriptor=json.dumps(descriptor, sort_keys=True), **arrays)


def load_checkpoint(path: str | Path) -> tuple[QNetwork, dict]:
    """Load a checkpoint; returns the network and its descriptor."""
    with np.load(path, allow_pickle=False) as data:
        descriptor = json.loads(str(data["descriptor"]))
        if descriptor.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {descriptor.get('version')!r}")
        q = QNetwork.__new__(QNetwork)
        q.state_dim = descriptor["state_dim"]
        q.n_actions = descriptor["n_actions"]
        q.hidden_sizes = descriptor["hidden_sizes"]
        layer_count = len(q.hidden_sizes) + 1
        q.weights = [data[f"w{i}"] for i in range(layer_count)]
        q.biases = [data[f"b{i}"] for i in range(layer_count)]
    return q, descriptor
