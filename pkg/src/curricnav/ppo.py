"""Discrete actor-critic PPO.

Rollouts are collected with the behavior policy's log-probabilities and value
estimates recorded at sampling time; updates run shuffled minibatch epochs of
the clipped surrogate objective with an added value-MSE term and an entropy
bonus, stepping both networks with Adam.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import envs, nets, sim
from .errors import ContractError, TrainingDiagnosticError


@dataclass
class PpoConfig:
    gamma: float = 0.99
    clip_eps: float = 0.2
    lr: float = 3e-4
    horizon: int = 6000
    epochs: int = 10
    minibatch_size: int = 600
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    gae_lambda: float | None = None  # None: plain discounted-return advantages
    normalize_advantages: bool = True

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ContractError(f"gamma {self.gamma} outside (0, 1]")
        if self.clip_eps <= 0.0:
            raise ContractError("clip_eps must be positive")


class RolloutBuffer:
    """Fixed-capacity per-step trajectory store, cleared after each update."""

    def __init__(self, capacity: int, obs_dim: int = sim.OBS_DIM):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.logps = np.zeros(capacity)
        self.rewards = np.zeros(capacity)
        self.values = np.zeros(capacity)
        self.terminals = np.zeros(capacity, dtype=bool)
        self.n = 0
        self.bootstrap_value = 0.0

    def add(self, obs, action, logp, reward, value, terminal):
        if self.n >= self.capacity:
            raise ContractError("rollout buffer full")
        i = self.n
        self.obs[i] = obs
        self.actions[i] = action
        self.logps[i] = logp
        self.rewards[i] = reward
        self.values[i] = value
        self.terminals[i] = terminal
        self.n += 1

    @property
    def full(self) -> bool:
        return self.n >= self.capacity

    def __len__(self) -> int:
        return self.n

    def clear(self):
        self.n = 0
        self.bootstrap_value = 0.0


def compute_advantages(buffer: RolloutBuffer, config: PpoConfig, normalize=None):
    """Per-step (advantage, return-target) arrays.

    Plain mode: advantage = discounted return (reset at terminals, value-
    bootstrapped at the horizon cut) minus the recorded value estimate.
    GAE mode runs the usual lambda-weighted telescoping sum.
    """
    n = len(buffer)
    if n == 0:
        raise ContractError("compute_advantages on an empty buffer")
    rewards = buffer.rewards[:n]
    values = buffer.values[:n]
    terminals = buffer.terminals[:n]
    if config.gae_lambda is None:
        returns = np.empty(n)
        carry = buffer.bootstrap_value
        for t in range(n - 1, -1, -1):
            carry = rewards[t] + config.gamma * carry * (0.0 if terminals[t] else 1.0)
            returns[t] = carry
        adv = returns - values
    else:
        lam = config.gae_lambda
        adv = np.empty(n)
        next_value = buffer.bootstrap_value
        carry = 0.0
        for t in range(n - 1, -1, -1):
            nonterm = 0.0 if terminals[t] else 1.0
            delta = rewards[t] + config.gamma * next_value * nonterm - values[t]
            carry = delta + config.gamma * lam * nonterm * carry
            adv[t] = carry
            next_value = values[t]
        returns = adv + values
    if normalize is None:
        normalize = config.normalize_advantages
    if normalize:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return adv, returns


@dataclass
class MiniBatch:
    obs: np.ndarray
    actions: np.ndarray
    logp_old: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray


@dataclass
class LossStats:
    total: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float


def ppo_loss(policy: nets.MlpNetwork, value_net: nets.MlpNetwork, batch: MiniBatch,
             config: PpoConfig):
    """Clipped-surrogate total loss with exact parameter gradients.

    Returns (LossStats, policy gradients, value gradients). The total is
    -mean(min(r*A, clip(r)*A)) + value_coef*MSE - entropy_coef*entropy.
    """
    n = len(batch.actions)
    probs, cache = policy.forward(batch.obs)
    idx = np.arange(n)
    with np.errstate(divide="ignore"):
        logp_new = np.log(probs[idx, batch.actions])
    ratio = np.exp(logp_new - batch.logp_old)
    if not np.isfinite(ratio).all():
        raise TrainingDiagnosticError(
            "non-finite policy ratio (degenerate action probabilities)",
            batch={
                "obs": batch.obs,
                "actions": batch.actions,
                "logp_old": batch.logp_old,
                "logp_new": logp_new,
            },
        )
    adv = batch.advantages
    clipped_ratio = np.clip(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps)
    unclipped = ratio * adv
    clipped = clipped_ratio * adv
    surrogate = np.minimum(unclipped, clipped)
    policy_loss = -float(surrogate.mean())

    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(probs > 0.0, probs * np.log(probs), 0.0)
    entropy_per = -plogp.sum(axis=1)
    entropy = float(entropy_per.mean())

    # d(-surrogate)/d(logp_new): gradient flows through the unclipped branch only
    active = (unclipped <= clipped).astype(float)
    dlogp = -(ratio * adv * active) / n
    one_hot = np.zeros_like(probs)
    one_hot[idx, batch.actions] = 1.0
    grad_logits = dlogp[:, None] * (one_hot - probs)
    # entropy bonus: d(-c_e * H)/d(logits) = c_e * p * (log p + H)
    if config.entropy_coef != 0.0:
        logp_full = np.where(probs > 0.0, np.log(probs), 0.0)
        grad_logits += (
            config.entropy_coef / n
        ) * probs * (logp_full + entropy_per[:, None])
    policy_grads = policy.backward_from_logits(cache, grad_logits)

    v, vcache = value_net.forward(batch.obs)
    verr = v - batch.returns
    value_loss = float((verr**2).mean())
    value_grads = value_net.backward(vcache, (2.0 * config.value_coef / n) * verr)

    stats = LossStats(
        total=policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy,
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=entropy,
        clip_fraction=float((np.abs(ratio - 1.0) > config.clip_eps).mean()),
        approx_kl=float((batch.logp_old - logp_new).mean()),
    )
    return stats, policy_grads, value_grads


class EnvRuntime:
    """Auto-resetting episode stream over one environment spec."""

    def __init__(self, spec: envs.EnvironmentSpec, params: sim.SimParams, rng):
        self.spec = spec
        self.params = params
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.outcomes: list[str] = []  # terminal value per finished episode
        self.episode_rewards: list[float] = []
        self._reward_acc = 0.0
        self.episode = self._new_episode()

    def _new_episode(self) -> sim.Episode:
        robot, goal = envs.sample_episode(self.spec, self.rng, self.params.robot_radius)
        return sim.Episode(self.spec.world, self.params, robot, goal)

    def step(self, action: int) -> sim.StepOutcome:
        outcome = self.episode.step(action)
        self._reward_acc += outcome.reward
        if outcome.terminal is not sim.Terminal.NONE:
            self.outcomes.append(outcome.terminal.value)
            self.episode_rewards.append(self._reward_acc)
            self._reward_acc = 0.0
            self.episode = self._new_episode()
        return outcome

    def switch_environment(self, spec: envs.EnvironmentSpec):
        """Load a new room and drop the in-flight episode (history kept)."""
        self.spec = spec
        self._reward_acc = 0.0
        self.episode = self._new_episode()


@dataclass
class RolloutStats:
    steps: int
    episodes: int
    successes: int
    mean_reward: float


def collect_rollout(runtime: EnvRuntime, policy, value_net, buffer: RolloutBuffer,
                    rng: np.random.Generator, n_steps=None) -> RolloutStats:
    """Fill the buffer by sampling actions from the softmax policy."""
    target = buffer.capacity if n_steps is None else min(n_steps, buffer.capacity)
    ep_before = len(runtime.outcomes)
    reward_sum = 0.0
    steps = 0
    while buffer.n < target:
        obs = runtime.episode.observation_vector()
        probs, _ = policy.forward(obs)
        u = rng.random()
        action = int(np.searchsorted(np.cumsum(probs), u))
        if action >= len(probs):
            action = len(probs) - 1
        logp = math.log(probs[action])
        value, _ = value_net.forward(obs)
        outcome = runtime.step(action)
        terminal = outcome.terminal is not sim.Terminal.NONE
        buffer.add(obs, action, logp, outcome.reward, value, terminal)
        reward_sum += outcome.reward
        steps += 1
    if buffer.terminals[buffer.n - 1]:
        buffer.bootstrap_value = 0.0
    else:
        v, _ = value_net.forward(runtime.episode.observation_vector())
        buffer.bootstrap_value = float(v)
    new_outcomes = runtime.outcomes[ep_before:]
    return RolloutStats(
        steps=steps,
        episodes=len(new_outcomes),
        successes=sum(1 for o in new_outcomes if o == sim.Terminal.REACHED.value),
        mean_reward=reward_sum / max(1, steps),
    )


@dataclass
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float
    minibatches: int


def update(policy, value_net, buffer: RolloutBuffer, config: PpoConfig,
           policy_opt: nets.AdamState, value_opt: nets.AdamState,
           rng: np.random.Generator) -> UpdateStats:
    """Run `epochs` shuffled minibatch passes and clear the buffer."""
    n = len(buffer)
    adv, returns = compute_advantages(buffer, config)
    obs = buffer.obs[:n]
    actions = buffer.actions[:n]
    logp_old = buffer.logps[:n]
    agg = np.zeros(5)
    count = 0
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch_size):
            sel = order[start:start + config.minibatch_size]
            batch = MiniBatch(obs[sel], actions[sel], logp_old[sel], adv[sel], returns[sel])
            stats, pgrads, vgrads = ppo_loss(policy, value_net, batch, config)
            nets.adam_step(policy, pgrads, policy_opt)
            nets.adam_step(value_net, vgrads, value_opt)
            agg += (stats.policy_loss, stats.value_loss, stats.entropy,
                    stats.clip_fraction, stats.approx_kl)
            count += 1
    buffer.clear()
    agg /= max(1, count)
    return UpdateStats(
        policy_loss=float(agg[0]),
        value_loss=float(agg[1]),
        entropy=float(agg[2]),
        clip_fraction=float(agg[3]),
        approx_kl=float(agg[4]),
        minibatches=count,
    )
