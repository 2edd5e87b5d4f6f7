"""Twin kinematics (mobile base, six-joint arm) and the safety monitor."""
