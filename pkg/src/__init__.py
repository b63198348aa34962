"""beamgan: generative beamspace channel estimation."""
