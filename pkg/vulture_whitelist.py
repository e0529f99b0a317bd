# Vulture whitelist: names used only through decorators, pydantic or click.
#
# Run vulture with: poetry run vulture app/ vulture_whitelist.py --min-confidence 80

# pydantic model validators, invoked by the model machinery
_check_chain  # unused method
_check_slack  # unused method
model_config  # unused variable

# ProgressHandle protocol members implemented by LogProgressHandle
send_progress_text  # unused method
send_progress_value  # unused method

# StrEnum members only reached through click.Choice values
EXACT  # unused variable
MCMC  # unused variable
