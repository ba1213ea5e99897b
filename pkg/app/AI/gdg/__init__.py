from .replay import (
    Transition, TransitionBatch, EpisodeTrace, ReplayBuffer, episode_transitions, anchor_transition,
    store_episode,
)
from .functions import (
    DistanceFunction, ForwardModel, LearnedDistance, LearnedModel, EuclideanDistance, SquaredDistance,
    PointDynamics,
)
from .agent import (
    GdgAgent, GdgLosses, actor_inputs, actor_objective, actor_objective_gradient, build_actor, triangle_violations,
)
