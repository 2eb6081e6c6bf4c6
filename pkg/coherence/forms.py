from dataclasses import dataclass

from django import forms
from django.conf import settings


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol: float = 1e-9
    shots: int = 10_000
    alpha: float = 1e-3
    format: str = 'json'
    out: str = ''
    max_cuts: int = 10_000


class RunConfigForm(forms.Form):
    """Validates the per-run options shared by every command."""

    seed = forms.IntegerField(min_value=0)
    tol = forms.FloatField()
    shots = forms.IntegerField(min_value=1)
    alpha = forms.FloatField()
    format = forms.ChoiceField(choices=[('json', 'json'), ('csv', 'csv')])
    out = forms.CharField(required=False)
    max_cuts = forms.IntegerField(min_value=1)

    @classmethod
    def from_options(cls, options):
        """Bind command options over the COHLAB settings; None means "not given"."""
        defaults = settings.COHLAB
        data = {
            'seed': defaults['SEED'],
            'tol': defaults['TOL'],
            'shots': defaults['SHOTS'],
            'alpha': defaults['ALPHA'],
            'format': defaults['FORMAT'],
            'out': '',
            'max_cuts': defaults['ROC_MAX_CUTS'],
        }
        data.update({k: v for k, v in options.items() if k in data and v is not None})
        return cls(data)

    def clean_tol(self):
        tol = self.cleaned_data['tol']
        if not 0 <= tol < 1:
            raise forms.ValidationError('tol must lie in [0, 1).')
        return tol

    def clean_alpha(self):
        alpha = self.cleaned_data['alpha']
        if not 0 < alpha < 1:
            raise forms.ValidationError('alpha must lie in (0, 1).')
        return alpha

    def to_config(self):
        return RunConfig(**self.cleaned_data)
