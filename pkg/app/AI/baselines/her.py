from typing import List

import numpy as np

from app.AI.gdg.replay import EpisodeTrace, GoalPredicate, Transition, episode_transitions
from app.core.exceptions import PreconditionError


def her_relabel(trace: EpisodeTrace, goal, k_future: int, rng: np.random.Generator,
                goal_predicate: GoalPredicate) -> List[Transition]:
    """
    "future" relabeling: after each original transition t, k_future copies whose
    goal is the achieved state s_j for j drawn uniformly from t+1..T.
    """
    if k_future < 0:
        raise PreconditionError("k_future must be non-negative")
    original = episode_transitions(trace, goal, goal_predicate)
    out: List[Transition] = []
    for t, item in enumerate(original):
        out.append(item)
        for _ in range(k_future):
            achieved = trace.states[int(rng.integers(t + 1, trace.steps + 1))]
            out.append(Transition(s=item.s, a=item.a, s_next=item.s_next, g=achieved, d=item.d,
                                  reached=bool(goal_predicate(item.s_next, achieved))))
    return out
