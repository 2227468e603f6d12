"""
Canonical vote choices and the platform label alias table.
"""
from django.db import models

from .exceptions import UnknownChoiceError

# Bump when the alias table changes; echoed into ingestion reports.
ALIAS_TABLE_VERSION = '1'


class Choice(models.TextChoices):
    FOR = 'for', 'For'
    AGAINST = 'against', 'Against'
    ABSTAIN = 'abstain', 'Abstain'


class RoundTag(models.TextChoices):
    OFFCHAIN = 'offchain', 'Off-chain (temperature check)'
    ONCHAIN = 'onchain', 'On-chain (binding vote)'
    UNSPECIFIED = 'unspecified', 'Unspecified'


CHOICE_ALIASES = {
    'for': Choice.FOR,
    'yes': Choice.FOR,
    'yae': Choice.FOR,
    'yea': Choice.FOR,
    'aye': Choice.FOR,
    'approve': Choice.FOR,
    'in favor': Choice.FOR,
    'support': Choice.FOR,
    'against': Choice.AGAINST,
    'no': Choice.AGAINST,
    'nay': Choice.AGAINST,
    'reject': Choice.AGAINST,
    'oppose': Choice.AGAINST,
    'abstain': Choice.ABSTAIN,
    'abstention': Choice.ABSTAIN,
    'neutral': Choice.ABSTAIN,
    'pass': Choice.ABSTAIN,
}


def parse_choice(label):
    """
    Map a platform choice label onto a canonical choice.

    Labels are compared case-insensitively after trimming; anything not
    in the alias table is rejected rather than guessed.

    Args:
        label: Raw label from an export

    Returns:
        Choice member
    """
    key = ' '.join(str(label).strip().lower().split())
    try:
        return CHOICE_ALIASES[key]
    except KeyError:
        raise UnknownChoiceError(f"Unknown choice label: {label!r}") from None


def parse_round_tag(value):
    key = str(value).strip().lower()
    if key in ('', 'none', 'unspecified'):
        return RoundTag.UNSPECIFIED
    aliases = {
        'offchain': RoundTag.OFFCHAIN,
        'off-chain': RoundTag.OFFCHAIN,
        'snapshot': RoundTag.OFFCHAIN,
        'temperature_check': RoundTag.OFFCHAIN,
        'onchain': RoundTag.ONCHAIN,
        'on-chain': RoundTag.ONCHAIN,
    }
    try:
        return aliases[key]
    except KeyError:
        raise UnknownChoiceError(f"Unknown round tag: {value!r}") from None
