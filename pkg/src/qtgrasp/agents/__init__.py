from .base import BaseAgent as BaseAgent
from .get_agent import get_agent as get_agent
from .q2f_opt import Q2FOptAgent as Q2FOptAgent
from .q2r_opt import Q2ROptAgent as Q2ROptAgent
from .qt_opt import QtOptAgent as QtOptAgent
