"""Environment families; importing this package registers them all."""
from . import crawler, messenger, navgraph, rtfm, textchoice
from .crawler import CrawlerEnv
from .messenger import MessengerEnv
from .navgraph import (
    NavGraphEnv,
    NavGraphManualEnv,
    downsample_image,
    downsample_patch,
    heading_to_column,
)
from .rtfm import RtfmEnv
from .textchoice import TextChoiceEnv

__all__ = [
    "crawler",
    "messenger",
    "navgraph",
    "rtfm",
    "textchoice",
    "CrawlerEnv",
    "MessengerEnv",
    "NavGraphEnv",
    "NavGraphManualEnv",
    "RtfmEnv",
    "TextChoiceEnv",
    "downsample_image",
    "downsample_patch",
    "heading_to_column",
]
