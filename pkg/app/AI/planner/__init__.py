from .bridge import CandidateSource, search_bridge, plan_waypoints, DEFAULT_MARGIN
from .waypoints import WaypointSelector, waypoint_policy
