from .ddpg import DdpgAgent, DdpgLosses, RewardMode, RewardSpec, LearnedQ, AnalyticQ, ddpg_train_step
from .her import her_relabel
from .random_policy import random_policy, RandomPolicy
