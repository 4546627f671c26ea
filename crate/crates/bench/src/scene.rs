//! Scene files: the environment bounds, the robot description, the posed
//! obstacles, the interpolation resolution and the scenario seed, as
//! versioned JSON.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

use spite::geom::Aabb;
use spite::robot::{Environment, Obstacle, RobotModel};

pub const SCENE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub version: u32,
    pub name: String,
    pub bounds: Aabb,
    pub resolution: f64,
    pub seed: u64,
    pub robot: RobotModel,
    pub obstacles: Vec<Obstacle>,
}

impl Scene {
    pub fn new(
        name: &str,
        bounds: Aabb,
        resolution: f64,
        seed: u64,
        robot: RobotModel,
        obstacles: Vec<Obstacle>,
    ) -> Self {
        Scene {
            version: SCENE_VERSION,
            name: name.to_string(),
            bounds,
            resolution,
            seed,
            robot,
            obstacles,
        }
    }

    /// Fresh environment at the scene's initial obstacle poses.
    pub fn environment(&self) -> Environment {
        Environment::new(self.bounds, self.obstacles.clone())
    }

    pub fn save(&self, path: &Path) -> spite::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> spite::Result<Scene> {
        let text = std::fs::read_to_string(path)?;
        let scene: Scene = serde_json::from_str(&text)?;
        if scene.version != SCENE_VERSION {
            return Err(spite::Error::Version { expected: SCENE_VERSION, got: scene.version });
        }
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> spite::Result<()> {
        if !(self.resolution > 0.0) {
            return Err(spite::Error::Invalid("resolution must be positive".into()));
        }
        let mut names = BTreeSet::new();
        for o in &self.obstacles {
            if !names.insert(&o.name) {
                return Err(spite::Error::Invalid(format!(
                    "duplicate obstacle name {:?}",
                    o.name
                )));
            }
            if o.bodies.is_empty() {
                return Err(spite::Error::Invalid(format!(
                    "obstacle {:?} has no bodies",
                    o.name
                )));
            }
        }
        if self.robot.bodies.is_empty() {
            return Err(spite::Error::Invalid("robot has no bodies".into()));
        }
        Ok(())
    }
}
